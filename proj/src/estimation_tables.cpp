#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "confound/estimation.hpp"

namespace confound {

long ProbTable::flat_index(const std::vector<int>& levels) const {
  if (levels.size() != supports.size())
    throw Error(Errc::support_mismatch, "level vector length mismatch");
  long idx = 0;
  for (size_t v = 0; v < supports.size(); ++v) {
    if (levels[v] < 0 || levels[v] >= card(static_cast<int>(v)))
      throw Error(Errc::support_mismatch, "level out of range");
    idx = idx * card(static_cast<int>(v)) + levels[v];
  }
  return idx;
}

std::vector<int> ProbTable::levels_at(long flat) const {
  std::vector<int> levels(supports.size());
  for (int v = n_vars() - 1; v >= 0; --v) {
    levels[v] = static_cast<int>(flat % card(v));
    flat /= card(v);
  }
  return levels;
}

namespace {

std::vector<double> table_support(const SampleTable& table, int col) {
  std::set<double> vals;
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    const double v = table.values(r, col);
    if (std::floor(v) != v)
      throw Error(Errc::unsupported_support, "column " + table.columns[col] + " not integer-valued");
    vals.insert(v);
    if (static_cast<int>(vals.size()) > kMaxDiscreteSupport)
      throw Error(Errc::unsupported_support, "column " + table.columns[col] + " has too many levels");
  }
  if (vals.empty()) throw Error(Errc::empty_context_set, "no rows");
  return {vals.begin(), vals.end()};
}

int level_of(const std::vector<double>& support, double v, const std::string& what) {
  auto it = std::lower_bound(support.begin(), support.end(), v);
  if (it == support.end() || *it != v)
    throw Error(Errc::support_mismatch, "value " + std::to_string(v) + " outside support of " + what);
  return static_cast<int>(it - support.begin());
}

long grid_size(const std::vector<std::vector<double>>& supports) {
  long n = 1;
  for (const auto& s : supports) n *= static_cast<long>(s.size());
  return n;
}

// Shared skeleton: counts over [targets..., givens...] with the last variable
// fastest, then either joint or per-given-row normalization.
ProbTable counted_table(const SampleTable& table, const std::vector<int>& targets,
                        const std::vector<int>& givens, double smoothing,
                        const std::vector<std::vector<double>>& supports_in, bool conditional) {
  if (targets.empty()) throw Error(Errc::invalid_set_size, "no target columns");
  std::vector<int> cols = targets;
  cols.insert(cols.end(), givens.begin(), givens.end());
  for (int c : cols)
    if (c < 0 || c >= static_cast<int>(table.columns.size()))
      throw Error(Errc::unknown_column, "column " + std::to_string(c) + " out of range");

  ProbTable out;
  out.n_targets = static_cast<int>(targets.size());
  out.sample_count = table.rows();
  for (size_t i = 0; i < cols.size(); ++i) {
    out.vars.push_back(table.columns[cols[i]]);
    if (!supports_in.empty()) {
      if (supports_in.size() != cols.size())
        throw Error(Errc::support_mismatch, "one support per column required");
      out.supports.push_back(supports_in[i]);
    } else {
      out.supports.push_back(table_support(table, cols[i]));
    }
  }

  Eigen::VectorXd counts = Eigen::VectorXd::Constant(grid_size(out.supports), smoothing);
  std::vector<int> levels(cols.size());
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    for (size_t v = 0; v < cols.size(); ++v)
      levels[v] = level_of(out.supports[v], table.values(r, cols[v]), out.vars[v]);
    counts[out.flat_index(levels)] += 1.0;
  }

  if (!conditional) {
    const double total = counts.sum();
    if (total <= 0) throw Error(Errc::empty_context_set, "no mass to normalize");
    out.p = counts / total;
    return out;
  }

  long target_block = 1;
  for (int v = 0; v < out.n_targets; ++v) target_block *= out.card(v);
  long given_block = counts.size() / target_block;
  out.p.resize(counts.size());
  // Given levels are the low-order digits (last variables are fastest), so a
  // given assignment g owns the strided cells {t * given_block + g}.
  for (long g = 0; g < given_block; ++g) {
    double total = 0;
    for (long t = 0; t < target_block; ++t) total += counts[t * given_block + g];
    if (total <= 0)
      throw Error(Errc::stratum_empty, "no mass for a given assignment (smoothing 0)");
    for (long t = 0; t < target_block; ++t)
      out.p[t * given_block + g] = counts[t * given_block + g] / total;
  }
  return out;
}

}  // namespace

ProbTable estimate_joint_table(const SampleTable& table, const std::vector<int>& cols,
                               double smoothing, const std::vector<std::vector<double>>& supports) {
  return counted_table(table, cols, {}, smoothing, supports, false);
}

ProbTable estimate_conditional_table(const SampleTable& table, const std::vector<int>& targets,
                                     const std::vector<int>& givens, double smoothing,
                                     const std::vector<std::vector<double>>& supports) {
  if (givens.empty()) return counted_table(table, targets, {}, smoothing, supports, false);
  return counted_table(table, targets, givens, smoothing, supports, true);
}

namespace {

// Hard values of `do_cols` declared by a context's metadata.
std::vector<double> hard_values(const ContextMeta& meta, const std::vector<int>& do_cols) {
  std::vector<double> vals;
  for (int col : do_cols) {
    bool found = false;
    for (const auto& r : meta.interventions)
      if (r.target == col && r.kind == InterventionRecord::Kind::hard && r.value) {
        vals.push_back(*r.value);
        found = true;
        break;
      }
    if (!found)
      throw Error(Errc::non_hard_context,
                  "context " + std::to_string(meta.id) + " does not hard-intervene column " +
                      std::to_string(col));
  }
  return vals;
}

}  // namespace

ProbTable interventional_conditional(const ContextSuite& suite, const std::vector<int>& ids,
                                     const std::vector<int>& targets,
                                     const std::vector<int>& do_cols,
                                     const std::vector<int>& strata, double smoothing) {
  if (ids.empty()) throw Error(Errc::empty_context_set, "no interventional contexts");
  if (do_cols.empty()) throw Error(Errc::invalid_set_size, "no do columns");

  std::vector<std::vector<double>> tgt_support, do_support, strata_support;
  for (int c : targets) tgt_support.push_back(column_support(suite, c));
  for (int c : do_cols) do_support.push_back(column_support(suite, c));
  for (int c : strata) strata_support.push_back(column_support(suite, c));

  ProbTable out;
  out.n_targets = static_cast<int>(targets.size());
  for (size_t i = 0; i < targets.size(); ++i) {
    out.vars.push_back(suite.columns[targets[i]]);
    out.supports.push_back(tgt_support[i]);
  }
  for (size_t i = 0; i < do_cols.size(); ++i) {
    out.vars.push_back(suite.columns[do_cols[i]]);
    out.supports.push_back(do_support[i]);
  }
  for (size_t i = 0; i < strata.size(); ++i) {
    out.vars.push_back(suite.columns[strata[i]]);
    out.supports.push_back(strata_support[i]);
  }

  // Group contexts by their joint hard assignment (as level indices).
  std::map<std::vector<int>, std::vector<int>> groups;
  for (int id : ids) {
    const auto vals = hard_values(suite.meta(id), do_cols);
    std::vector<int> levels(do_cols.size());
    for (size_t i = 0; i < do_cols.size(); ++i)
      levels[i] = level_of(do_support[i], vals[i], suite.columns[do_cols[i]]);
    groups[levels].push_back(id);
    out.sample_count += suite.table(id).rows();
  }

  long do_grid = grid_size(do_support);
  if (static_cast<long>(groups.size()) < do_grid) {
    std::string missing;
    std::vector<int> levels(do_cols.size(), 0);
    for (long flat = 0; flat < do_grid; ++flat) {
      long rem = flat;
      for (int v = static_cast<int>(do_cols.size()) - 1; v >= 0; --v) {
        levels[v] = static_cast<int>(rem % do_support[v].size());
        rem /= static_cast<long>(do_support[v].size());
      }
      if (!groups.count(levels)) {
        missing += missing.empty() ? "" : "; ";
        for (size_t v = 0; v < do_cols.size(); ++v)
          missing += suite.columns[do_cols[v]] + "=" +
                     std::to_string(do_support[v][levels[v]]) + (v + 1 < do_cols.size() ? "," : "");
      }
    }
    throw Error(Errc::support_not_covered,
                "hard contexts missing for do-values: " + missing);
  }

  out.p = Eigen::VectorXd::Zero(grid_size(out.supports));
  const long strata_grid = grid_size(strata_support);
  long tgt_grid = grid_size(tgt_support);

  for (const auto& [do_levels, group] : groups) {
    // Within the group, average each context's conditional-on-strata target
    // distribution; contexts lacking a stratum are skipped for that stratum.
    for (long s = 0; s < strata_grid; ++s) {
      std::vector<int> s_levels(strata.size());
      long rem = s;
      for (int v = static_cast<int>(strata.size()) - 1; v >= 0; --v) {
        s_levels[v] = static_cast<int>(rem % strata_support[v].size());
        rem /= static_cast<long>(strata_support[v].size());
      }
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(tgt_grid);
      int contributors = 0;
      for (int id : group) {
        const auto& t = suite.table(id);
        Eigen::VectorXd counts = Eigen::VectorXd::Constant(tgt_grid, smoothing);
        long rows_here = 0;
        for (Eigen::Index r = 0; r < t.rows(); ++r) {
          bool in_stratum = true;
          for (size_t v = 0; v < strata.size(); ++v)
            if (t.values(r, strata[v]) != strata_support[v][s_levels[v]]) {
              in_stratum = false;
              break;
            }
          if (!in_stratum) continue;
          ++rows_here;
          long idx = 0;
          for (size_t v = 0; v < targets.size(); ++v)
            idx = idx * static_cast<long>(tgt_support[v].size()) +
                  level_of(tgt_support[v], t.values(r, targets[v]), out.vars[v]);
          counts[idx] += 1.0;
        }
        if (rows_here == 0) continue;
        acc += counts / counts.sum();
        ++contributors;
      }
      if (contributors == 0) {
        std::string desc;
        for (size_t v = 0; v < strata.size(); ++v)
          desc += suite.columns[strata[v]] + "=" +
                  std::to_string(strata_support[v][s_levels[v]]) + " ";
        throw Error(Errc::stratum_empty, "no interventional rows for stratum " + desc);
      }
      acc /= contributors;
      // Scatter into the output grid: index order is [targets, do, strata].
      for (long t = 0; t < tgt_grid; ++t) {
        std::vector<int> levels;
        levels.reserve(out.supports.size());
        long rem_t = t;
        std::vector<int> t_levels(targets.size());
        for (int v = static_cast<int>(targets.size()) - 1; v >= 0; --v) {
          t_levels[v] = static_cast<int>(rem_t % tgt_support[v].size());
          rem_t /= static_cast<long>(tgt_support[v].size());
        }
        levels.insert(levels.end(), t_levels.begin(), t_levels.end());
        levels.insert(levels.end(), do_levels.begin(), do_levels.end());
        levels.insert(levels.end(), s_levels.begin(), s_levels.end());
        out.p[out.flat_index(levels)] = acc[t];
      }
    }
  }
  return out;
}

namespace {

void check_alignment(const ProbTable& a, const ProbTable& b) {
  if (a.vars != b.vars || a.n_targets != b.n_targets)
    throw Error(Errc::support_mismatch, "tables are over different variables");
  for (int v = 0; v < a.n_vars(); ++v)
    if (a.supports[v] != b.supports[v])
      throw Error(Errc::support_mismatch, "supports differ for " + a.vars[v]);
}

}  // namespace

InfoEstimate directed_information(const ProbTable& joint, const ProbTable& cond,
                                  const ProbTable& do_cond) {
  check_alignment(cond, do_cond);
  if (joint.vars != cond.vars)
    throw Error(Errc::support_mismatch, "joint and conditional variable order differ");
  if (joint.conditional())
    throw Error(Errc::support_mismatch, "expectation table must be a joint");
  if (joint.size() != cond.size())
    throw Error(Errc::support_mismatch, "grid sizes differ");

  double sum = 0;
  for (long i = 0; i < joint.size(); ++i) {
    const double w = joint.p[i];
    if (w <= 0) continue;
    const double c = cond.p[i];
    const double d = do_cond.p[i];
    if (d <= 0) {
      if (c <= 0) continue;
      throw Error(Errc::divergence_infinite,
                  "interventional probability is zero on a cell with observational mass");
    }
    if (c == d) continue;  // exact zero contribution
    sum += w * std::log(c / d);
  }
  InfoEstimate est;
  est.raw = sum;
  est.value = std::max(0.0, sum);
  est.estimator = "plugin_kl";
  est.sample_count = joint.sample_count;
  return est;
}

namespace {

// Pools observational contexts into one table for joint/conditional fits.
SampleTable pooled_rows(const ContextSuite& suite, const std::vector<int>& ids) {
  if (ids.empty()) throw Error(Errc::empty_context_set, "no observational contexts in suite");
  long rows = 0;
  for (int id : ids) rows += suite.table(id).rows();
  SampleTable out;
  out.columns = suite.columns;
  out.values.resize(rows, static_cast<Eigen::Index>(suite.columns.size()));
  long at = 0;
  for (int id : ids) {
    const auto& t = suite.table(id);
    out.values.middleRows(at, t.rows()) = t.values;
    at += t.rows();
  }
  return out;
}

}  // namespace

InfoEstimate suite_directed_information(const ContextSuite& suite, const std::vector<int>& sources,
                                        const std::vector<int>& targets,
                                        const std::vector<int>& strata,
                                        const std::vector<int>& obs_ids,
                                        const std::vector<int>& do_ids, double smoothing) {
  const SampleTable obs = pooled_rows(suite, obs_ids);

  std::vector<std::vector<double>> sup_src, sup_all_given, sup_joint;
  std::vector<int> givens = targets;
  givens.insert(givens.end(), strata.begin(), strata.end());
  std::vector<int> all_cols = sources;
  all_cols.insert(all_cols.end(), givens.begin(), givens.end());
  for (int c : sources) sup_src.push_back(column_support(suite, c));
  for (int c : givens) sup_all_given.push_back(column_support(suite, c));
  sup_joint = sup_src;
  sup_joint.insert(sup_joint.end(), sup_all_given.begin(), sup_all_given.end());

  const ProbTable joint = estimate_joint_table(obs, all_cols, smoothing, sup_joint);
  const ProbTable cond = estimate_conditional_table(obs, sources, givens, smoothing, sup_joint);
  const ProbTable doc = interventional_conditional(suite, do_ids, sources, targets, strata, smoothing);
  return directed_information(joint, cond, doc);
}

}  // namespace confound
