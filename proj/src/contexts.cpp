#include "confound/contexts.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

namespace confound {

namespace fs = std::filesystem;
using nlohmann::json;

const ContextMeta& ContextSuite::meta(int id) const {
  for (const auto& m : metas)
    if (m.id == id) return m;
  throw Error(Errc::empty_context_set, "no context with id " + std::to_string(id));
}

const SampleTable& ContextSuite::table(int id) const {
  for (size_t i = 0; i < metas.size(); ++i)
    if (metas[i].id == id) return tables[i];
  throw Error(Errc::empty_context_set, "no context with id " + std::to_string(id));
}

std::vector<int> ContextSuite::observational_ids() const {
  std::vector<int> out;
  for (const auto& m : metas)
    if (m.observational) out.push_back(m.id);
  return out;
}

std::vector<int> select_contexts(const std::vector<ContextMeta>& metas, const std::vector<int>& S,
                                 const std::vector<int>& R, SelectMode mode) {
  std::vector<int> out;
  for (const auto& m : metas) {
    const std::set<int> shifted(m.shifted.begin(), m.shifted.end());
    bool s_ok = true;
    for (int v : S)
      if (!shifted.count(v)) {
        s_ok = false;
        break;
      }
    if (!s_ok) continue;
    bool r_ok = true;
    for (int v : R) {
      const bool in = shifted.count(v) > 0;
      if (mode == SelectMode::and_all ? !in : in) {
        r_ok = false;
        break;
      }
    }
    if (r_ok) out.push_back(m.id);
  }
  return out;
}

namespace {

void check_col(const ContextSuite& suite, int col) {
  if (col < 0 || col >= static_cast<int>(suite.columns.size()))
    throw Error(Errc::unknown_column, "column " + std::to_string(col) + " out of range");
}

void check_ids(const std::vector<int>& ids) {
  if (ids.empty()) throw Error(Errc::empty_context_set, "no contexts selected");
}

}  // namespace

ContextExpectations context_expectations(const ContextSuite& suite, const std::vector<int>& ids,
                                         int col) {
  check_ids(ids);
  check_col(suite, col);
  ContextExpectations out;
  out.ids = ids;
  out.values.resize(static_cast<Eigen::Index>(ids.size()), 1);
  for (size_t r = 0; r < ids.size(); ++r) {
    const auto& t = suite.table(ids[r]);
    if (t.rows() == 0) throw Error(Errc::empty_context_set, "context with no rows");
    out.values(static_cast<Eigen::Index>(r), 0) = t.values.col(col).mean();
  }
  return out;
}

std::vector<double> column_support(const ContextSuite& suite, int col) {
  check_col(suite, col);
  std::set<double> values;
  for (const auto& t : suite.tables)
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      const double v = t.values(r, col);
      if (std::floor(v) != v)
        throw Error(Errc::unsupported_support,
                    "column " + suite.columns[col] + " is not integer-valued");
      values.insert(v);
      if (static_cast<int>(values.size()) > kMaxDiscreteSupport)
        throw Error(Errc::unsupported_support,
                    "column " + suite.columns[col] + " has too many levels");
    }
  if (values.empty()) throw Error(Errc::empty_context_set, "suite has no rows");
  return {values.begin(), values.end()};
}

ContextExpectations conditional_context_expectations(const ContextSuite& suite,
                                                     const std::vector<int>& ids, int col,
                                                     int given) {
  check_ids(ids);
  check_col(suite, col);
  check_col(suite, given);
  const auto support = column_support(suite, given);
  ContextExpectations out;
  out.ids = ids;
  out.given_support = support;
  out.values.resize(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(support.size()));
  for (size_t r = 0; r < ids.size(); ++r) {
    const auto& t = suite.table(ids[r]);
    for (size_t s = 0; s < support.size(); ++s) {
      double sum = 0;
      long count = 0;
      for (Eigen::Index row = 0; row < t.rows(); ++row)
        if (t.values(row, given) == support[s]) {
          sum += t.values(row, col);
          ++count;
        }
      if (count == 0)
        throw Error(Errc::unsupported_support,
                    "context " + std::to_string(ids[r]) + " has no rows with " +
                        suite.columns[given] + " = " + std::to_string(support[s]));
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) = sum / count;
    }
  }
  return out;
}

namespace {

std::string format_value(double v) {
  if (std::floor(v) == v && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json meta_to_json(const ContextMeta& m) {
  json j;
  j["id"] = m.id;
  j["shifted"] = m.shifted;
  auto ivs = json::array();
  for (const auto& r : m.interventions) {
    json ji;
    ji["target"] = r.target;
    ji["kind"] = r.kind == InterventionRecord::Kind::hard ? "hard" : "soft";
    if (r.value) ji["value"] = *r.value;
    ivs.push_back(ji);
  }
  j["interventions"] = ivs;
  j["observational"] = m.observational;
  return j;
}

ContextMeta meta_from_json(const json& j, std::vector<std::string>* warnings) {
  static const std::set<std::string> known{"id", "shifted", "interventions", "observational"};
  static const std::set<std::string> known_iv{"target", "kind", "value"};
  ContextMeta m;
  try {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!known.count(it.key()) && warnings)
        warnings->push_back("ignoring unknown context field '" + it.key() + "'");
    m.id = j.at("id").get<int>();
    m.shifted = j.at("shifted").get<std::vector<int>>();
    m.observational = j.at("observational").get<bool>();
    for (const auto& ji : j.at("interventions")) {
      for (auto it = ji.begin(); it != ji.end(); ++it)
        if (!known_iv.count(it.key()) && warnings)
          warnings->push_back("ignoring unknown intervention field '" + it.key() + "'");
      InterventionRecord r;
      r.target = ji.at("target").get<int>();
      const std::string kind = ji.at("kind").get<std::string>();
      if (kind == "hard")
        r.kind = InterventionRecord::Kind::hard;
      else if (kind == "soft")
        r.kind = InterventionRecord::Kind::soft;
      else
        throw Error(Errc::malformed_file, "unknown intervention kind '" + kind + "'");
      if (ji.contains("value")) r.value = ji["value"].get<double>();
      m.interventions.push_back(r);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_file, std::string("context metadata: ") + e.what());
  }
  return m;
}

}  // namespace

void save_suite(const ContextSuite& suite, const std::string& dir) {
  fs::create_directories(dir);
  json j;
  j["schema_version"] = 1;
  j["columns"] = suite.columns;
  j["n_observed"] = suite.n_observed;
  auto metas = json::array();
  for (const auto& m : suite.metas) metas.push_back(meta_to_json(m));
  j["metas"] = metas;
  {
    std::ofstream out(fs::path(dir) / "suite.json");
    out << j.dump(2) << "\n";
  }
  for (size_t i = 0; i < suite.metas.size(); ++i) {
    std::ofstream out(fs::path(dir) / ("ctx_" + std::to_string(suite.metas[i].id) + ".csv"));
    const auto& t = suite.tables[i];
    for (size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
    out << "\n";
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c)
        out << (c ? "," : "") << format_value(t.values(r, c));
      out << "\n";
    }
  }
}

ContextSuite load_suite(const std::string& dir, std::vector<std::string>* warnings) {
  const fs::path meta_path = fs::path(dir) / "suite.json";
  std::ifstream in(meta_path);
  if (!in) throw Error(Errc::malformed_file, "cannot open " + meta_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_file, meta_path.string() + ": " + e.what());
  }
  static const std::set<std::string> known{"schema_version", "columns", "n_observed", "metas"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()) && warnings)
      warnings->push_back("ignoring unknown suite field '" + it.key() + "'");
  ContextSuite suite;
  try {
    suite.columns = j.at("columns").get<std::vector<std::string>>();
    suite.n_observed = j.at("n_observed").get<int>();
    for (const auto& jm : j.at("metas")) suite.metas.push_back(meta_from_json(jm, warnings));
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_file, meta_path.string() + ": " + e.what());
  }

  for (const auto& m : suite.metas) {
    const fs::path csv = fs::path(dir) / ("ctx_" + std::to_string(m.id) + ".csv");
    std::ifstream cin(csv);
    if (!cin) throw Error(Errc::malformed_file, "missing context file " + csv.string());
    std::string line;
    if (!std::getline(cin, line))
      throw Error(Errc::malformed_file, csv.string() + ": empty file");
    SampleTable t;
    {
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
    }
    if (t.columns != suite.columns)
      throw Error(Errc::malformed_file, csv.string() + ": header does not match suite columns");
    std::vector<double> data;
    long rows = 0;
    while (std::getline(cin, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      size_t c = 0;
      while (std::getline(ss, cell, ',')) {
        try {
          data.push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw Error(Errc::malformed_file, csv.string() + ": bad number '" + cell + "'");
        }
        ++c;
      }
      if (c != suite.columns.size())
        throw Error(Errc::malformed_file,
                    csv.string() + ": row " + std::to_string(rows) + " has " + std::to_string(c) +
                        " cells, expected " + std::to_string(suite.columns.size()));
      ++rows;
    }
    t.values.resize(rows, static_cast<Eigen::Index>(suite.columns.size()));
    for (long r = 0; r < rows; ++r)
      for (size_t c = 0; c < suite.columns.size(); ++c)
        t.values(r, static_cast<Eigen::Index>(c)) = data[r * suite.columns.size() + c];
    suite.tables.push_back(std::move(t));
  }
  return suite;
}

}  // namespace confound
