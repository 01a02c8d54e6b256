#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "confound/measures.hpp"
#include "confound/rng.hpp"

namespace confound {

namespace {

double squash(double info) { return 1.0 - std::exp(-info); }

void check_observed(const ContextSuite& suite, int col) {
  if (col < 0 || col >= suite.n_observed)
    throw Error(Errc::unknown_column, "variable " + std::to_string(col) + " is not observed");
}

void check_column(const ContextSuite& suite, int col) {
  if (col < 0 || col >= static_cast<int>(suite.columns.size()))
    throw Error(Errc::unknown_column, "column " + std::to_string(col) + " out of range");
}

std::vector<int> obs_or_throw(const ContextSuite& suite) {
  auto ids = suite.observational_ids();
  if (ids.empty()) throw Error(Errc::empty_context_set, "suite has no observational contexts");
  return ids;
}

// Contexts usable to estimate P(targets | do(X_do_cols)): every do column is
// hard-intervened, and nothing that can still influence the targets around
// the clamps may be shifted. With structure knowledge that is every observed
// ancestor of a target, targets included, climbing only through non-clamped
// nodes; a clamped node blocks its own ancestry. Without structure knowledge
// no other observed variable may shift at all.
std::vector<int> hard_do_ids(const ContextSuite& suite, const std::vector<int>& do_cols,
                             const std::vector<int>& targets, const MeasureOptions& opts) {
  std::set<int> r;
  if (opts.dag) {
    const std::set<int> clamped(do_cols.begin(), do_cols.end());
    std::set<int> seen;
    std::vector<int> stack(targets.begin(), targets.end());
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      if (seen.count(v) || clamped.count(v)) continue;
      seen.insert(v);
      for (int p : opts.dag->parents(v)) stack.push_back(p);
    }
    // Latent shifts are recorded through their observed children, so only
    // observed ancestors matter for the selection.
    for (int v : seen)
      if (v < suite.n_observed) r.insert(v);
  } else {
    for (int v = 0; v < suite.n_observed; ++v) r.insert(v);
  }
  for (int a : do_cols) r.erase(a);

  const std::vector<int> R(r.begin(), r.end());
  std::vector<int> hard;
  for (int id : select_contexts(suite.metas, do_cols, R, SelectMode::and_not)) {
    const auto& meta = suite.meta(id);
    bool all_hard = true;
    for (int a : do_cols) {
      bool found = false;
      for (const auto& iv : meta.interventions)
        if (iv.target == a && iv.kind == InterventionRecord::Kind::hard && iv.value) {
          found = true;
          break;
        }
      if (!found) {
        all_hard = false;
        break;
      }
    }
    if (all_hard) hard.push_back(id);
  }
  if (hard.empty()) {
    std::string cols;
    for (int a : do_cols) cols += (cols.empty() ? "" : ",") + suite.columns[a];
    throw Error(Errc::empty_context_set, "no admissible hard contexts intervening {" + cols + "}");
  }
  return hard;
}

}  // namespace

CnfValue cnf1_pair(const ContextSuite& suite, int i, int j, const MeasureOptions& opts) {
  return cnf1_conditional(suite, i, j, {}, opts);
}

CnfValue cnf1_conditional(const ContextSuite& suite, int i, int j, const std::vector<int>& o,
                          const MeasureOptions& opts) {
  check_observed(suite, i);
  check_observed(suite, j);
  for (int c : o) check_column(suite, c);

  CnfValue out;
  out.setting = 1;
  out.members = {i, j};
  out.conditioning = o;
  if (i == j) return out;  // reflexivity: zero without estimation

  const auto obs_ids = obs_or_throw(suite);
  // The strata variables are estimated alongside the targets, so the do
  // contexts must leave them untouched too.
  std::vector<int> ti{i}, tj{j};
  ti.insert(ti.end(), o.begin(), o.end());
  tj.insert(tj.end(), o.begin(), o.end());
  const auto do_j = hard_do_ids(suite, {j}, ti, opts);
  const auto do_i = hard_do_ids(suite, {i}, tj, opts);
  const InfoEstimate fwd =
      suite_directed_information(suite, {i}, {j}, o, obs_ids, do_j, opts.smoothing);
  const InfoEstimate rev =
      suite_directed_information(suite, {j}, {i}, o, obs_ids, do_i, opts.smoothing);

  out.info = std::min(fwd.value, rev.value);
  out.value = squash(out.info);
  out.components = {fwd, rev};
  out.contexts_used = static_cast<long>(obs_ids.size() + do_j.size() + do_i.size());
  return out;
}

CnfValue cnf1_joint(const ContextSuite& suite, const std::vector<int>& S,
                    const MeasureOptions& opts) {
  if (S.size() < 2) throw Error(Errc::invalid_set_size, "joint measure needs at least two variables");
  for (int v : S) check_observed(suite, v);
  if (std::set<int>(S.begin(), S.end()).size() != S.size())
    throw Error(Errc::invalid_set_size, "duplicate variables in set");
  if (S.size() == 2) {
    CnfValue v = cnf1_pair(suite, S[0], S[1], opts);
    v.members = S;
    return v;
  }

  const auto obs_ids = obs_or_throw(suite);
  CnfValue out;
  out.setting = 1;
  out.members = S;
  double info_sum = 0, value_sum = 0;
  long ctx = static_cast<long>(obs_ids.size());
  for (int i : S) {
    std::vector<int> rest;
    for (int v : S)
      if (v != i) rest.push_back(v);
    const auto do_i = hard_do_ids(suite, {i}, rest, opts);
    const auto do_rest = hard_do_ids(suite, rest, {i}, opts);
    // Pair measure between the vector variable X_rest and X_i.
    const InfoEstimate a =
        suite_directed_information(suite, rest, {i}, {}, obs_ids, do_i, opts.smoothing);
    const InfoEstimate b =
        suite_directed_information(suite, {i}, rest, {}, obs_ids, do_rest, opts.smoothing);
    const double term = std::min(a.value, b.value);
    info_sum += term;
    value_sum += squash(term);
    out.components.push_back(a);
    out.components.push_back(b);
    ctx += static_cast<long>(do_i.size() + do_rest.size());
  }
  out.info = info_sum;
  out.value = squash(info_sum);
  out.component_value_sum = value_sum;
  out.contexts_used = ctx;
  return out;
}

TripleTestResult thm1_joint_unconfounded_test(const ContextSuite& suite, const std::vector<int>& S,
                                              double tol, const MeasureOptions& opts) {
  if (S.size() < 3) throw Error(Errc::invalid_set_size, "triple test needs at least three variables");
  for (int v : S) check_observed(suite, v);
  const auto obs_ids = obs_or_throw(suite);

  TripleTestResult res;
  res.threshold = tol;
  double best = std::numeric_limits<double>::infinity();
  for (int i : S)
    for (int j : S) {
      if (j == i) continue;
      for (int k : S) {
        if (k == i || k == j) continue;
        const auto do_j = hard_do_ids(suite, {j}, {i, k}, opts);
        const InfoEstimate cond =
            suite_directed_information(suite, {i}, {j}, {k}, obs_ids, do_j, opts.smoothing);
        const InfoEstimate joint =
            suite_directed_information(suite, {i, k}, {j}, {}, obs_ids, do_j, opts.smoothing);
        const double gap = std::abs(cond.value - joint.value);
        if (gap < best) {
          best = gap;
          res.triple = {i, j, k};
          res.statistic = gap;
        }
        if (gap <= tol) {
          res.verdict = true;
          res.triple = {i, j, k};
          res.statistic = gap;
          return res;
        }
      }
    }
  res.verdict = false;
  return res;
}

namespace {

// Expectation streams over the contexts shifting every variable in S.
std::vector<int> stream_ids(const ContextSuite& suite, const std::vector<int>& S) {
  auto ids = select_contexts(suite.metas, S, {}, SelectMode::and_all);
  if (static_cast<int>(ids.size()) < kMinContextsForInfo)
    throw Error(Errc::insufficient_contexts,
                "only " + std::to_string(ids.size()) + " contexts shift the requested variables; " +
                    std::to_string(kMinContextsForInfo) + " needed");
  return ids;
}

Eigen::MatrixXd expectation_stream(const ContextSuite& suite, const std::vector<int>& ids,
                                   int col) {
  return context_expectations(suite, ids, col).values;
}

Eigen::MatrixXd conditional_stream(const ContextSuite& suite, const std::vector<int>& ids, int col,
                                   int given) {
  return conditional_context_expectations(suite, ids, col, given).values;
}

Eigen::MatrixXd hstack(const std::vector<Eigen::MatrixXd>& parts) {
  Eigen::Index cols = 0;
  for (const auto& p : parts) cols += p.cols();
  Eigen::MatrixXd out(parts.front().rows(), cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p;
    at += p.cols();
  }
  return out;
}

}  // namespace

CnfValue cnf2_pair(const ContextSuite& suite, int i, int j, const MeasureOptions& opts) {
  return cnf2_conditional(suite, i, j, {}, opts);
}

CnfValue cnf2_conditional(const ContextSuite& suite, int i, int j, const std::vector<int>& o,
                          const MeasureOptions& opts) {
  check_observed(suite, i);
  check_observed(suite, j);
  for (int c : o) check_column(suite, c);

  CnfValue out;
  out.setting = 2;
  out.members = {i, j};
  out.conditioning = o;

  const auto ids = stream_ids(suite, i == j ? std::vector<int>{i} : std::vector<int>{i, j});
  out.contexts_used = static_cast<long>(ids.size());

  std::vector<Eigen::MatrixXd> cond_parts;
  for (int c : o) cond_parts.push_back(expectation_stream(suite, ids, c));

  if (i == j) {
    // Reflexive value: entropy of the stream, conditioned at the context level.
    const Eigen::MatrixXd ei = expectation_stream(suite, ids, i);
    const InfoEstimate h = o.empty() ? entropy(ei, opts.info)
                                     : conditional_entropy(ei, hstack(cond_parts), opts.info);
    out.info = std::max(0.0, h.value);
    out.value = squash(out.info);
    out.components = {h};
    return out;
  }

  const Eigen::MatrixXd ei = expectation_stream(suite, ids, i);
  const Eigen::MatrixXd ej = expectation_stream(suite, ids, j);
  const InfoEstimate mi = o.empty()
                              ? mutual_information(ei, ej, opts.info)
                              : conditional_mutual_information(ei, ej, hstack(cond_parts), opts.info);
  out.info = mi.value;
  out.value = squash(out.info);
  out.components = {mi};
  return out;
}

CnfValue cnf2_joint(const ContextSuite& suite, const std::vector<int>& S,
                    const MeasureOptions& opts) {
  if (S.size() < 2) throw Error(Errc::invalid_set_size, "joint measure needs at least two variables");
  for (int v : S) check_observed(suite, v);
  if (std::set<int>(S.begin(), S.end()).size() != S.size())
    throw Error(Errc::invalid_set_size, "duplicate variables in set");

  const auto ids = stream_ids(suite, S);
  std::vector<Eigen::MatrixXd> streams;
  for (int v : S) streams.push_back(expectation_stream(suite, ids, v));
  const InfoEstimate tc = total_correlation(streams, opts.info);

  CnfValue out;
  out.setting = 2;
  out.members = S;
  out.info = tc.value;
  out.value = squash(out.info);
  out.components = {tc};
  out.contexts_used = static_cast<long>(ids.size());
  return out;
}

TripleTestResult thm3_joint_confounded_test(const ContextSuite& suite, const std::vector<int>& S,
                                            double noise_floor, const MeasureOptions& opts) {
  if (S.size() < 3) throw Error(Errc::invalid_set_size, "triple test needs at least three variables");
  for (int v : S) check_observed(suite, v);

  TripleTestResult res;
  res.threshold = noise_floor;
  res.verdict = true;
  double worst = std::numeric_limits<double>::infinity();
  for (size_t a = 0; a < S.size(); ++a)
    for (size_t b = a + 1; b < S.size(); ++b)
      for (int k : S) {
        if (k == S[a] || k == S[b]) continue;
        const auto ids = stream_ids(suite, {S[a], S[b], k});
        const Eigen::MatrixXd ea = expectation_stream(suite, ids, S[a]);
        const Eigen::MatrixXd eb = expectation_stream(suite, ids, S[b]);
        const Eigen::MatrixXd ek = expectation_stream(suite, ids, k);
        const double mi = mutual_information(ea, eb, opts.info).value;
        const double cmi = conditional_mutual_information(ea, eb, ek, opts.info).value;
        const double gap = mi - cmi;
        if (gap < worst) {
          worst = gap;
          res.triple = {S[a], S[b], k};
          res.statistic = gap;
        }
        if (gap <= noise_floor) {
          res.verdict = false;
          res.triple = {S[a], S[b], k};
          res.statistic = gap;
          return res;
        }
      }
  return res;
}

CnfValue cnf3_pair(const ContextSuite& suite, int i, int j, Direction direction,
                   const MeasureOptions& opts) {
  return cnf3_conditional(suite, i, j, {}, direction, opts);
}

CnfValue cnf3_conditional(const ContextSuite& suite, int i, int j, const std::vector<int>& o,
                          Direction direction, const MeasureOptions& opts) {
  if (direction == Direction::none_known) {
    CnfValue v = cnf2_conditional(suite, i, j, o, opts);
    v.setting = 3;
    return v;
  }
  check_observed(suite, i);
  check_observed(suite, j);
  for (int c : o) check_column(suite, c);

  // Orient so the first argument causes the second, then pair the effect's
  // conditional-mean-given-cause stream with its own expectation stream.
  const int cause = direction == Direction::i_to_j ? i : j;
  const int effect = direction == Direction::i_to_j ? j : i;

  CnfValue out;
  out.setting = 3;
  out.members = {i, j};
  out.conditioning = o;

  const auto ids = stream_ids(suite, {i, j});
  out.contexts_used = static_cast<long>(ids.size());

  const Eigen::MatrixXd mech = conditional_stream(suite, ids, effect, cause);
  const Eigen::MatrixXd marg = expectation_stream(suite, ids, effect);
  InfoEstimate mi;
  if (o.empty()) {
    mi = mutual_information(mech, marg, opts.info);
  } else {
    std::vector<Eigen::MatrixXd> cond_parts;
    for (int c : o) cond_parts.push_back(expectation_stream(suite, ids, c));
    mi = conditional_mutual_information(mech, marg, hstack(cond_parts), opts.info);
  }
  out.info = mi.value;
  out.value = squash(out.info);
  out.components = {mi};
  return out;
}

TripleTestResult thm5_joint_confounded_test(const ContextSuite& suite, const std::vector<int>& S,
                                            const std::map<std::pair<int, int>, Direction>& directions,
                                            double noise_floor, const MeasureOptions& opts) {
  if (S.size() < 3) throw Error(Errc::invalid_set_size, "triple test needs at least three variables");
  for (int v : S) check_observed(suite, v);
  for (size_t a = 0; a < S.size(); ++a)
    for (size_t b = a + 1; b < S.size(); ++b) {
      const auto key = std::minmax(S[a], S[b]);
      const auto it = directions.find({key.first, key.second});
      if (it == directions.end() || it->second == Direction::none_known)
        throw Error(Errc::direction_required,
                    "no causal direction given for pair (" + std::to_string(key.first) + "," +
                        std::to_string(key.second) + ")");
    }

  TripleTestResult res;
  res.threshold = noise_floor;
  res.verdict = true;
  double worst = std::numeric_limits<double>::infinity();
  for (int i : S)
    for (int j : S) {
      if (j == i) continue;
      for (int k : S) {
        if (k == i || k == j) continue;
        const auto ids = stream_ids(suite, {i, j, k});
        const Eigen::MatrixXd eij = conditional_stream(suite, ids, i, j);
        const Eigen::MatrixXd ejk = conditional_stream(suite, ids, j, k);
        const Eigen::MatrixXd ej = expectation_stream(suite, ids, j);
        const double mi = mutual_information(eij, ejk, opts.info).value;
        const double cmi = conditional_mutual_information(eij, ejk, ej, opts.info).value;
        const double gap = mi - cmi;
        if (gap < worst) {
          worst = gap;
          res.triple = {i, j, k};
          res.statistic = gap;
        }
        if (gap <= noise_floor) {
          res.verdict = false;
          res.triple = {i, j, k};
          res.statistic = gap;
          return res;
        }
      }
    }
  return res;
}

bool detect(const CnfValue& value, const DetectionConfig& cfg) {
  return value.value > cfg.threshold;
}

namespace {

template <typename F>
double quantile_of_trials(int trials, double q, F&& trial_value) {
  std::vector<double> vals(trials);
  for (int t = 0; t < trials; ++t) vals[t] = trial_value(t);
  std::sort(vals.begin(), vals.end());
  const int idx = std::min<int>(trials - 1, static_cast<int>(std::ceil(q * trials)) - 1);
  return vals[std::max(0, idx)];
}

}  // namespace

double null_quantile_threshold(const ContextSuite& suite, int i, int j, int setting,
                               const DetectionConfig& cfg, const MeasureOptions& opts) {
  if (cfg.trials < 1) throw Error(Errc::invalid_set_size, "calibration needs at least one trial");
  check_observed(suite, i);
  check_observed(suite, j);

  if (setting == 1) {
    // Break the X_i -- X_j association inside each observational context and
    // rescore; interventional tables stay as they are.
    ContextSuite shuffled = suite;
    Rng rng(derive_seed(cfg.seed, 0x5e77u));
    return quantile_of_trials(cfg.trials, cfg.quantile, [&](int) {
      for (size_t c = 0; c < shuffled.metas.size(); ++c) {
        if (!shuffled.metas[c].observational) continue;
        auto& vals = shuffled.tables[c].values;
        for (Eigen::Index r = vals.rows() - 1; r >= 1; --r) {
          const auto s = static_cast<Eigen::Index>(uniform_below(rng, static_cast<std::uint64_t>(r + 1)));
          std::swap(vals(r, j), vals(s, j));
        }
      }
      return cnf1_pair(shuffled, i, j, opts).value;
    });
  }
  if (setting != 2 && setting != 3)
    throw Error(Errc::invalid_set_size, "setting must be 1, 2 or 3");

  // Settings 2 and 3 share a stream-permutation null: reorder one
  // expectation stream across contexts and rescore the MI.
  const auto ids = stream_ids(suite, {i, j});
  const Eigen::MatrixXd ei = expectation_stream(suite, ids, i);
  Eigen::MatrixXd ej = expectation_stream(suite, ids, j);
  Rng rng(derive_seed(cfg.seed, 0x5e77u));
  return quantile_of_trials(cfg.trials, cfg.quantile, [&](int) {
    for (Eigen::Index r = ej.rows() - 1; r >= 1; --r) {
      const auto s = static_cast<Eigen::Index>(uniform_below(rng, static_cast<std::uint64_t>(r + 1)));
      ej.row(r).swap(ej.row(s));
    }
    return squash(mutual_information(ei, ej, opts.info).value);
  });
}

}  // namespace confound
