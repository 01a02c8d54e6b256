#pragma once

#include <array>
#include <map>
#include <vector>

#include "confound/estimation.hpp"
#include "confound/graph.hpp"

namespace confound {

// Causal direction between the two arguments of a pair measure: the first
// argument causes the second, the reverse, or unknown.
enum class Direction { i_to_j, j_to_i, none_known };

struct MeasureOptions {
  double smoothing = 0.5;
  InfoOptions info;
  // Structure knowledge used only to pick admissible do-contexts (nodes on
  // directed paths from the intervened variable must not be shifted). Without
  // it the selection is conservative: no other observed variable may shift.
  const Dag* dag = nullptr;
};

// A confounding score in [0,1), squashed from an information quantity via
// 1 - e^{-info}. `components` keeps the underlying estimates (both directed
// informations for setting 1, the stream MI/CMI/TC otherwise).
struct CnfValue {
  double value = 0;
  int setting = 0;  // 1, 2 or 3
  double info = 0;  // information the value squashes, >= 0
  std::vector<int> members;       // the pair or set
  std::vector<int> conditioning;  // observed conditioning variables
  std::vector<InfoEstimate> components;
  // Set variant of setting 1 only: plain sum of the per-split squashed
  // values. May exceed 1; `value` uses the summed information instead.
  double component_value_sum = 0;
  long contexts_used = 0;
};

// Outcome of a triple-based joint test. `triple` is the witness (existence
// tests) or the first failing triple (universal tests); `statistic` is the
// gap evaluated there.
struct TripleTestResult {
  bool verdict = false;
  std::array<int, 3> triple{{-1, -1, -1}};
  double statistic = 0;
  double threshold = 0;
};

struct DetectionConfig {
  double threshold = 0.05;
  bool null_quantile = false;  // calibrate the threshold from shuffled nulls
  double quantile = 0.95;
  int trials = 100;
  std::uint64_t seed = 1;
};

// --- setting 1: interventional contexts ------------------------------------

// 1 - exp(-min of the two directed informations), both estimated from
// observational conditionals against context-averaged interventional tables.
CnfValue cnf1_pair(const ContextSuite& suite, int i, int j, const MeasureOptions& opts = {});

// Directed informations stratified on the observed set `o`.
CnfValue cnf1_conditional(const ContextSuite& suite, int i, int j, const std::vector<int>& o,
                          const MeasureOptions& opts = {});

// Sum over i in S of the pair measure between X_{S minus i} (one
// vector-valued variable) and X_i. Reports the plain sum alongside a value
// squashed from the summed information; a two-element S reduces to the pair.
CnfValue cnf1_joint(const ContextSuite& suite, const std::vector<int>& S,
                    const MeasureOptions& opts = {});

// Joint unconfoundedness: true iff some ordered triple (i,j,k) from S has
// |I(Xi -> Xj | Xk) - I({Xi,Xk} -> Xj)| <= tol.
TripleTestResult thm1_joint_unconfounded_test(const ContextSuite& suite, const std::vector<int>& S,
                                              double tol, const MeasureOptions& opts = {});

// --- setting 2: mechanism-shift metadata ------------------------------------

// 1 - exp(-MI of the per-context expectation streams of Xi and Xj) over the
// contexts shifting both. With i == j the information is the (clamped)
// entropy of the stream.
CnfValue cnf2_pair(const ContextSuite& suite, int i, int j, const MeasureOptions& opts = {});

// Conditioning is realized at the context level: CMI given the expectation
// streams of the variables in `o`.
CnfValue cnf2_conditional(const ContextSuite& suite, int i, int j, const std::vector<int>& o,
                          const MeasureOptions& opts = {});

// 1 - exp(-total correlation of all expectation streams of S) over contexts
// shifting all of S.
CnfValue cnf2_joint(const ContextSuite& suite, const std::vector<int>& S,
                    const MeasureOptions& opts = {});

// Joint confoundedness: true iff every triple has
// MI(E_i;E_j) - CMI(E_i;E_j|E_k) > noise_floor.
TripleTestResult thm3_joint_confounded_test(const ContextSuite& suite, const std::vector<int>& S,
                                            double noise_floor = 0.15,
                                            const MeasureOptions& opts = {});

// --- setting 3: known causal direction --------------------------------------

// With a known direction the conditional-mean stream of the effect given the
// cause is paired with the effect's own expectation stream; with no known
// direction this is exactly the setting-2 pair value.
CnfValue cnf3_pair(const ContextSuite& suite, int i, int j, Direction direction,
                   const MeasureOptions& opts = {});

CnfValue cnf3_conditional(const ContextSuite& suite, int i, int j, const std::vector<int>& o,
                          Direction direction, const MeasureOptions& opts = {});

// Joint confoundedness from conditional-mean streams: true iff for every
// ordered triple (i,j,k),
// MI(E_{i|j}; E_{j|k}) - CMI(E_{i|j}; E_{j|k} | E_j) > noise_floor.
// `directions` must orient every pair of S (keys (a,b) with a < b; i_to_j
// meaning a causes b), else DirectionRequired.
TripleTestResult thm5_joint_confounded_test(const ContextSuite& suite, const std::vector<int>& S,
                                            const std::map<std::pair<int, int>, Direction>& directions,
                                            double noise_floor = 0.15,
                                            const MeasureOptions& opts = {});

// --- detection ---------------------------------------------------------------

// Fixed-threshold positivity check.
bool detect(const CnfValue& value, const DetectionConfig& cfg);

// Data-driven threshold: the q-quantile of the measure recomputed on
// `trials` shuffled nulls. Setting 1 permutes Xj within each observational
// context; settings 2 and 3 permute the context order of one expectation
// stream.
double null_quantile_threshold(const ContextSuite& suite, int i, int j, int setting,
                               const DetectionConfig& cfg, const MeasureOptions& opts = {});

}  // namespace confound
