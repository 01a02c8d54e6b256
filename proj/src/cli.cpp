#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "confound/bench.hpp"
#include "confound/cli.hpp"

namespace confound {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

std::optional<ThreeNodeGraph> parse_three_node(const std::string& name) {
  static const std::map<std::string, ThreeNodeGraph> names = {
      {"g1", ThreeNodeGraph::g1}, {"g2", ThreeNodeGraph::g2}, {"g3", ThreeNodeGraph::g3},
      {"g4", ThreeNodeGraph::g4}, {"g5", ThreeNodeGraph::g5}, {"g6", ThreeNodeGraph::g6}};
  std::string lower = name;
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const auto it = names.find(lower);
  if (it == names.end()) return std::nullopt;
  return it->second;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error(Errc::malformed_file, "cannot write " + path);
  f << text;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::malformed_file, "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string graph = "g3";
  int n = 10;
  long samples = 1000;
  int soft_contexts = 48;
  int hard_replicas = 2;
  double edge_degree = 2.0;
  double shift_prob = 0.3;
  std::uint64_t seed = 1;
  std::string out_dir;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  Dag dag;
  ContextSuite suite;
  if (const auto g = parse_three_node(a.graph)) {
    dag = three_node_dag(*g);
    suite = three_node_suite(*g, a.samples, a.hard_replicas, a.soft_contexts, a.seed);
  } else if (a.graph == "er") {
    ErSpec spec;
    spec.edge_degree = a.edge_degree;
    spec.soft_contexts = a.soft_contexts;
    spec.shift_prob = a.shift_prob;
    dag = er_benchmark_dag(a.n, spec, a.seed);
    const BinaryScm scm = er_benchmark_scm(dag, spec, derive_seed(a.seed, 0x5c31u));
    // One mixed plan serves all settings: observational and hard contexts
    // first, then soft-shift contexts.
    MechanismShiftPlan plan;
    int id = 0;
    plan.contexts.push_back({id++, {}});
    plan.contexts.push_back({id++, {}});
    for (int v = 0; v < dag.n_observed(); ++v)
      for (double value : {0.0, 1.0}) plan.contexts.push_back({id++, {Intervention::hard(v, value)}});
    const auto soft = er_soft_plan(scm, a.soft_contexts, a.shift_prob, spec.obs_shift_prob,
                                   derive_seed(a.seed, 0xa070u));
    for (const auto& ctx : soft.contexts) plan.contexts.push_back({id++, ctx.interventions});
    suite = generate_context_suite(scm, plan, a.samples, derive_seed(a.seed, 0x3a12u), false);
  } else {
    throw Error(Errc::malformed_file, "unknown graph family '" + a.graph + "'");
  }

  save_suite(suite, a.out_dir);
  write_text((fs::path(a.out_dir) / "dag.json").string(), dag_to_json(dag), out);
  out << "wrote " << suite.metas.size() << " contexts to " << a.out_dir << "\n";
  return kExitOk;
}

// --- measure ------------------------------------------------------------------

struct MeasureArgs {
  std::string suite_dir;
  std::vector<int> pair;
  std::vector<int> set;
  std::vector<int> condition;
  std::string setting = "all";
  std::string direction = "none_known";
  double threshold = 0.05;
  bool calibrate = false;
  std::uint64_t seed = 1;
  std::string out_path;
};

ordered_json info_json(const InfoEstimate& e) {
  return ordered_json{{"value", e.value},
                      {"raw", e.raw},
                      {"estimator", e.estimator},
                      {"sample_count", e.sample_count}};
}

ordered_json cnf_json(const CnfValue& v, bool detected, double threshold) {
  ordered_json j;
  j["setting"] = v.setting;
  j["value"] = v.value;
  j["info"] = v.info;
  j["detected"] = detected;
  j["threshold"] = threshold;
  j["status"] = "ok";
  j["contexts_used"] = v.contexts_used;
  if (v.component_value_sum > 0) j["component_value_sum"] = v.component_value_sum;
  j["components"] = ordered_json::array();
  for (const auto& c : v.components) j["components"].push_back(info_json(c));
  return j;
}

int run_measure(const MeasureArgs& a, std::ostream& out, std::ostream& err) {
  if (a.pair.empty() == a.set.empty()) {
    err << "measure needs exactly one of --pair or --set\n";
    return kExitUsage;
  }
  if (!a.pair.empty() && a.pair.size() != 2) {
    err << "--pair takes exactly two variable indices\n";
    return kExitUsage;
  }
  if (!a.set.empty() && a.set.size() < 2) {
    err << "--set takes at least two variable indices\n";
    return kExitUsage;
  }
  if (!a.set.empty() && !a.condition.empty()) {
    err << "--condition applies to pairs only\n";
    return kExitUsage;
  }
  if (!a.set.empty() && a.calibrate) {
    err << "--calibrate applies to pairs only\n";
    return kExitUsage;
  }
  Direction dir;
  if (a.direction == "i_to_j") {
    dir = Direction::i_to_j;
  } else if (a.direction == "j_to_i") {
    dir = Direction::j_to_i;
  } else if (a.direction == "none_known" || a.direction == "none") {
    dir = Direction::none_known;
  } else {
    err << "--direction must be i_to_j, j_to_i or none_known\n";
    return kExitUsage;
  }
  std::vector<int> settings;
  if (a.setting == "all") {
    settings = {1, 2, 3};
  } else if (a.setting == "1" || a.setting == "2" || a.setting == "3") {
    settings = {a.setting[0] - '0'};
  } else {
    err << "--setting must be 1, 2, 3 or all\n";
    return kExitUsage;
  }

  std::vector<std::string> warnings;
  const ContextSuite suite = load_suite(a.suite_dir, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";

  Dag dag;
  MeasureOptions mo;
  const fs::path dag_path = fs::path(a.suite_dir) / "dag.json";
  if (fs::exists(dag_path)) {
    dag = dag_from_json(read_text(dag_path.string()));
    mo.dag = &dag;
  }

  ordered_json report;
  report["schema_version"] = 1;
  report["kind"] = "measure";
  report["suite"] = a.suite_dir;
  if (!a.pair.empty()) report["pair"] = a.pair;
  if (!a.set.empty()) report["set"] = a.set;
  if (!a.condition.empty()) report["conditioning"] = a.condition;
  report["structure_known"] = mo.dag != nullptr;
  report["results"] = ordered_json::array();

  int computed = 0;
  std::string first_error;
  for (int setting : settings) {
    try {
      double tau = a.threshold;
      if (a.calibrate && !a.pair.empty()) {
        DetectionConfig cal;
        cal.null_quantile = true;
        cal.seed = a.seed;
        tau = null_quantile_threshold(suite, a.pair[0], a.pair[1], setting, cal, mo);
      }
      CnfValue v;
      if (!a.pair.empty()) {
        const int i = a.pair[0], j = a.pair[1];
        if (setting == 1) v = cnf1_conditional(suite, i, j, a.condition, mo);
        if (setting == 2) v = cnf2_conditional(suite, i, j, a.condition, mo);
        if (setting == 3) v = cnf3_conditional(suite, i, j, a.condition, dir, mo);
      } else {
        if (setting == 1) v = cnf1_joint(suite, a.set, mo);
        if (setting == 2) v = cnf2_joint(suite, a.set, mo);
        if (setting == 3) {
          v = cnf2_joint(suite, a.set, mo);  // joint value shared with setting 2
          v.setting = 3;
        }
      }
      DetectionConfig cfg;
      cfg.threshold = tau;
      ordered_json entry = cnf_json(v, detect(v, cfg), tau);
      if (a.calibrate) entry["calibrated"] = true;
      if (!a.set.empty() && setting == 3) entry["note"] = "joint value shared with setting 2";
      report["results"].push_back(std::move(entry));
      ++computed;
    } catch (const Error& e) {
      if (first_error.empty()) first_error = e.what();
      report["results"].push_back(ordered_json{
          {"setting", setting}, {"value", 0.0}, {"detected", false}, {"status", errc_name(e.code())},
          {"message", e.what()}});
    }
  }

  write_text(a.out_path, report.dump(2), out);
  if (computed == 0) {
    err << "no requested setting could be computed; context requirements unmet: " << first_error
        << "\n";
    return kExitData;
  }
  return kExitOk;
}

// --- bench --------------------------------------------------------------------

template <typename T>
void assign_if(const std::vector<T>& src, std::vector<T>& dst) {
  if (!src.empty()) dst = src;
}

// --- report -------------------------------------------------------------------

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string scalar_to_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
    return buf;
  }
  return v.dump();
}

// Flattens one report row to column -> scalar; nested objects get dotted keys.
void flatten_row(const std::string& prefix, const json& value,
                 std::vector<std::pair<std::string, std::string>>& cells) {
  if (value.is_object()) {
    for (const auto& [k, v] : value.items())
      flatten_row(prefix.empty() ? k : prefix + "." + k, v, cells);
  } else if (value.is_array()) {
    cells.emplace_back(prefix, value.dump());
  } else {
    cells.emplace_back(prefix, scalar_to_string(value));
  }
}

int run_report(const std::string& in_path, const std::string& format, const std::string& out_path,
               std::ostream& out, std::ostream& err) {
  json doc;
  try {
    doc = json::parse(read_text(in_path));
  } catch (const json::exception& e) {
    err << "not a report JSON: " << e.what() << "\n";
    return kExitData;
  }
  // Benchmark reports call their array "rows", measure reports "results".
  const char* key = doc.contains("rows") && doc["rows"].is_array()      ? "rows"
                    : doc.contains("results") && doc["results"].is_array() ? "results"
                                                                           : nullptr;
  if (!key) {
    err << "report JSON has no rows array\n";
    return kExitData;
  }

  std::vector<std::string> columns;
  std::vector<std::map<std::string, std::string>> table;
  for (const auto& row : doc[key]) {
    std::vector<std::pair<std::string, std::string>> cells;
    flatten_row("", row, cells);
    std::map<std::string, std::string> m;
    for (auto& [k, v] : cells) {
      if (std::find(columns.begin(), columns.end(), k) == columns.end()) columns.push_back(k);
      m[k] = v;
    }
    table.push_back(std::move(m));
  }

  std::string text;
  if (format == "csv") {
    for (size_t c = 0; c < columns.size(); ++c) text += (c ? "," : "") + csv_escape(columns[c]);
    text += "\n";
    for (const auto& row : table) {
      for (size_t c = 0; c < columns.size(); ++c) {
        const auto it = row.find(columns[c]);
        text += (c ? "," : "") + csv_escape(it == row.end() ? "" : it->second);
      }
      text += "\n";
    }
  } else if (format == "markdown") {
    auto line = [&](const std::vector<std::string>& vals) {
      std::string s = "|";
      for (const auto& v : vals) s += " " + v + " |";
      return s + "\n";
    };
    text += line(columns);
    text += line(std::vector<std::string>(columns.size(), "---"));
    for (const auto& row : table) {
      std::vector<std::string> vals;
      for (const auto& c : columns) {
        const auto it = row.find(c);
        vals.push_back(it == row.end() ? "" : it->second);
      }
      text += line(vals);
    }
  } else {
    err << "--format must be csv or markdown\n";
    return kExitUsage;
  }
  write_text(out_path, text, out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"confounding detection from multi-context data"};
  app.require_subcommand(1);

  // simulate
  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate a context suite on disk");
  simulate->add_option("--graph", sim.graph, "g1..g6 or er")->capture_default_str();
  simulate->add_option("--n", sim.n, "observed nodes (er only)")->capture_default_str();
  simulate->add_option("--samples", sim.samples, "rows per context")->capture_default_str();
  simulate->add_option("--soft-contexts", sim.soft_contexts)->capture_default_str();
  simulate->add_option("--hard-replicas", sim.hard_replicas)->capture_default_str();
  simulate->add_option("--edge-degree", sim.edge_degree, "expected out-degree (er)")
      ->capture_default_str();
  simulate->add_option("--shift-prob", sim.shift_prob)->capture_default_str();
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_option("--out", sim.out_dir, "suite directory")->required();

  // measure
  MeasureArgs mea;
  auto* measure = app.add_subcommand("measure", "score a pair or set on a stored suite");
  measure->add_option("--suite", mea.suite_dir, "suite directory")->required();
  measure->add_option("--pair", mea.pair, "two variable indices i,j")->delimiter(',');
  measure->add_option("--set", mea.set, "variable indices i,j,k,...")->delimiter(',');
  measure->add_option("--condition", mea.condition, "conditioning column indices")->delimiter(',');
  measure->add_option("--setting", mea.setting, "1, 2, 3 or all")->capture_default_str();
  measure->add_option("--direction", mea.direction, "i_to_j, j_to_i or none_known")
      ->capture_default_str();
  measure->add_option("--threshold", mea.threshold, "detection threshold")->capture_default_str();
  measure->add_flag("--calibrate", mea.calibrate, "threshold from shuffled nulls");
  measure->add_option("--seed", mea.seed, "calibration seed")->capture_default_str();
  measure->add_option("--out", mea.out_path, "output path (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "run a benchmark");
  bench->require_subcommand(1);

  ThreeNodeSpec tn_spec;
  std::string tn_out;
  auto* tn = bench->add_subcommand("three-node", "canonical two-variable fixtures");
  tn->add_option("--samples", tn_spec.samples_per_context)->capture_default_str();
  tn->add_option("--soft-contexts", tn_spec.soft_contexts)->capture_default_str();
  tn->add_option("--seeds", tn_spec.seeds, "seed list")->delimiter(',');
  tn->add_option("--threshold", tn_spec.detection.threshold)->capture_default_str();
  tn->add_option("--out", tn_out);

  DownstreamSpec ds_spec;
  std::string ds_out;
  std::vector<long> ds_samples;
  auto* ds = bench->add_subcommand("downstream", "effect estimation before/after adjustment");
  ds->add_option("--sample-sizes", ds_samples, "per-context sample sizes")->delimiter(',');
  ds->add_option("--seeds", ds_spec.seeds)->delimiter(',');
  ds->add_option("--out", ds_out);

  ErSpec er_spec;
  std::string er_out, er_format = "json";
  std::vector<int> er_n, er_settings;
  std::vector<long> er_samples;
  std::vector<std::uint64_t> er_seeds;
  auto* er = bench->add_subcommand("er", "random-graph detection grid");
  er->add_option("--n-nodes", er_n, "graph sizes")->delimiter(',');
  er->add_option("--sample-sizes", er_samples)->delimiter(',');
  er->add_option("--settings", er_settings)->delimiter(',');
  er->add_option("--seeds", er_seeds)->delimiter(',');
  er->add_option("--soft-contexts", er_spec.soft_contexts)->capture_default_str();
  er->add_option("--threads", er_spec.threads)->capture_default_str();
  er->add_option("--tau1", er_spec.tau1)->capture_default_str();
  er->add_option("--tau2", er_spec.tau2)->capture_default_str();
  er->add_option("--tau3", er_spec.tau3)->capture_default_str();
  er->add_option("--format", er_format, "json or csv")->capture_default_str();
  er->add_option("--out", er_out);

  // report
  std::string rep_in, rep_format = "csv", rep_out;
  auto* report = app.add_subcommand("report", "render a report JSON as a table");
  report->add_option("--in", rep_in, "report JSON path")->required();
  report->add_option("--format", rep_format, "csv or markdown")->capture_default_str();
  report->add_option("--out", rep_out);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim, out);
    if (measure->parsed()) return run_measure(mea, out, err);
    if (tn->parsed()) {
      write_text(tn_out, three_node_report_json(run_three_node_suite(tn_spec)), out);
      return kExitOk;
    }
    if (ds->parsed()) {
      assign_if(ds_samples, ds_spec.sample_sizes);
      write_text(ds_out, downstream_report_json(run_downstream_ate(ds_spec), ds_spec), out);
      return kExitOk;
    }
    if (er->parsed()) {
      assign_if(er_n, er_spec.n_nodes);
      assign_if(er_samples, er_spec.sample_sizes);
      assign_if(er_settings, er_spec.settings);
      assign_if(er_seeds, er_spec.seeds);
      const auto rows = run_er_benchmark(er_spec);
      if (er_format == "csv") {
        write_text(er_out, er_report_csv(rows), out);
      } else if (er_format == "json") {
        write_text(er_out, er_report_json(rows, er_spec), out);
      } else {
        err << "--format must be json or csv\n";
        return kExitUsage;
      }
      return kExitOk;
    }
    if (report->parsed()) return run_report(rep_in, rep_format, rep_out, out, err);
  } catch (const Error& e) {
    err << "error (" << errc_name(e.code()) << "): " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  err << "no subcommand given\n";
  return kExitUsage;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace confound
