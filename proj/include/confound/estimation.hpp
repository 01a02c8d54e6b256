#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "confound/contexts.hpp"

namespace confound {

// Dense probability grid over discrete variables. Variable order is
// [targets..., givens...]; the flat index is row-major with the LAST variable
// fastest. A joint table has no givens and sums to 1; a conditional table
// sums to 1 over the target block for every given assignment.
struct ProbTable {
  std::vector<std::string> vars;
  std::vector<std::vector<double>> supports;  // per variable, sorted
  int n_targets = 0;
  Eigen::VectorXd p;
  long sample_count = 0;

  int n_vars() const { return static_cast<int>(vars.size()); }
  bool conditional() const { return n_targets < n_vars(); }
  int card(int v) const { return static_cast<int>(supports[v].size()); }
  long size() const { return p.size(); }

  long flat_index(const std::vector<int>& levels) const;
  std::vector<int> levels_at(long flat) const;
  double at(const std::vector<int>& levels) const { return p[flat_index(levels)]; }
};

// Point estimate of an information quantity. `value` is clamped at zero for
// divergences/informations; `raw` keeps the unclamped estimate.
struct InfoEstimate {
  double value = 0;
  double raw = 0;
  std::string estimator;
  long sample_count = 0;
};

// --- discrete tables ------------------------------------------------------

// Laplace-smoothed joint estimate over the listed columns. Supports may be
// given explicitly (e.g. suite-wide) or inferred from the table.
ProbTable estimate_joint_table(const SampleTable& table, const std::vector<int>& cols,
                               double smoothing = 0.5,
                               const std::vector<std::vector<double>>& supports = {});

// Laplace-smoothed conditional P(targets | givens).
ProbTable estimate_conditional_table(const SampleTable& table, const std::vector<int>& targets,
                                     const std::vector<int>& givens, double smoothing = 0.5,
                                     const std::vector<std::vector<double>>& supports = {});

// Interventional conditional P(targets | do(do_cols) [, strata]) averaged
// over contexts, grouping the selected contexts by their joint hard values on
// do_cols. Every selected context must hard-intervene all of do_cols
// (NonHardContext) and the groups must cover the full joint support of
// do_cols (SupportNotCovered). With strata columns, each context contributes
// its within-context conditional; a stratum level no context can estimate
// raises StratumEmpty.
ProbTable interventional_conditional(const ContextSuite& suite, const std::vector<int>& ids,
                                     const std::vector<int>& targets,
                                     const std::vector<int>& do_cols,
                                     const std::vector<int>& strata = {}, double smoothing = 0.5);

// E_joint log [cond / do_cond] with both conditionals over the same target
// and given blocks. Zero-probability joint cells contribute nothing; a zero
// do-cell under positive joint mass raises DivergenceInfinite. Exactly zero
// when cond and do_cond agree cell-wise.
InfoEstimate directed_information(const ProbTable& joint, const ProbTable& cond,
                                  const ProbTable& do_cond);

// I(sources -> target | strata) assembled from a suite: observational
// contexts provide the joint and the conditional, do_ids provide the
// interventional table (hard interventions on every target column).
InfoEstimate suite_directed_information(const ContextSuite& suite,
                                        const std::vector<int>& sources,
                                        const std::vector<int>& targets,
                                        const std::vector<int>& strata,
                                        const std::vector<int>& obs_ids,
                                        const std::vector<int>& do_ids, double smoothing = 0.5);

// --- continuous information ------------------------------------------------

enum class InfoMethod { ksg, histogram };

struct InfoOptions {
  int k = 3;            // nearest-neighbor order
  int bins = 0;         // histogram mode; 0 = ceil(sqrt(n))
  InfoMethod method = InfoMethod::ksg;
  double jitter = 1e-10;
  std::uint64_t jitter_seed = 0x2545f4914f6cdd1dull;
};

// Mutual information between (possibly multivariate) streams; rows are
// observations. KSG estimator with Chebyshev distances; ties are broken by a
// deterministic jitter keyed on column content, so argument order does not
// change the result.
InfoEstimate mutual_information(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys,
                                const InfoOptions& opts = {});

InfoEstimate conditional_mutual_information(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys,
                                            const Eigen::MatrixXd& zs,
                                            const InfoOptions& opts = {});

// Differential entropy (nats); not clamped, may be negative.
InfoEstimate entropy(const Eigen::MatrixXd& xs, const InfoOptions& opts = {});

// H(X|Y) = H(X,Y) - H(Y); not clamped.
InfoEstimate conditional_entropy(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys,
                                 const InfoOptions& opts = {});

// Total correlation: sum of marginal entropies minus joint entropy; clamped.
InfoEstimate total_correlation(const std::vector<Eigen::MatrixXd>& streams,
                               const InfoOptions& opts = {});

double digamma(double x);

}  // namespace confound
