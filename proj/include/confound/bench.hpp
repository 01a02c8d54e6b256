#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "confound/measures.hpp"
#include "confound/scm.hpp"

namespace confound {

// The six canonical two-observed-variable fixtures. X0 and X1 are the
// measured pair throughout; Z columns follow them.
//   g1: no edges at all (isolated latent)
//   g2: X0 -> X1 (isolated latent)
//   g3: Z -> X0, Z -> X1
//   g4: g3 plus X0 -> X1
//   g5: two latents, each a parent of both X0 and X1
//   g6: g3 with the latent meant to be revealed and conditioned on
enum class ThreeNodeGraph { g1, g2, g3, g4, g5, g6 };

const char* three_node_name(ThreeNodeGraph g);
Dag three_node_dag(ThreeNodeGraph g);

// Fixed mechanism parameters (latent priors 0.5, strongly coupled children)
// so every run of the harness speaks about the same distributions.
BinaryScm three_node_scm(ThreeNodeGraph g);

// Context plan: two observational contexts, hard interventions on each
// observed node and value (replicated), then soft contexts each redrawing
// every latent mechanism. Mechanism changes only ever originate in latents,
// so graphs without latent children never produce joint-shift contexts and
// the stream measures report that absence (mapped to zero by the harness)
// instead of scoring noise.
MechanismShiftPlan three_node_plan(const BinaryScm& scm, int hard_replicas, int soft_contexts,
                                   std::uint64_t seed);

// Full suite (latent columns revealed) for one seed.
ContextSuite three_node_suite(ThreeNodeGraph g, long samples, int hard_replicas,
                              int soft_contexts, std::uint64_t seed);

struct ThreeNodeSpec {
  std::vector<ThreeNodeGraph> graphs = {ThreeNodeGraph::g1, ThreeNodeGraph::g2,
                                        ThreeNodeGraph::g3, ThreeNodeGraph::g4,
                                        ThreeNodeGraph::g5, ThreeNodeGraph::g6};
  long samples_per_context = 5000;
  int hard_replicas = 2;
  int soft_contexts = 240;
  int knn = 10;  // stream estimator neighbor order; streams here are long
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  DetectionConfig detection;
};

// A measure evaluation that may have been impossible on the given suite;
// such outcomes score as "no confounding detected" and carry the reason.
struct MeasureOutcome {
  CnfValue value;
  bool detected = false;
  std::string status = "ok";
};

struct ThreeNodeRow {
  std::string graph;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, MeasureOutcome>> outcomes;
};

struct ThreeNodeReport {
  long samples_per_context = 0;
  int soft_contexts = 0;
  double threshold = 0;
  std::vector<ThreeNodeRow> rows;
};

// Pairwise measures for g1-g4, conditional stream measures (none / each
// revealed latent) for g5 and g6, one row per graph and seed.
ThreeNodeReport run_three_node_suite(const ThreeNodeSpec& spec);

std::string three_node_report_json(const ThreeNodeReport& report);

// --- downstream adjustment ---------------------------------------------------

struct DownstreamSpec {
  std::vector<ThreeNodeGraph> graphs = {ThreeNodeGraph::g3, ThreeNodeGraph::g4};
  std::vector<long> sample_sizes = {1000, 2000, 3000, 4000, 5000};
  int hard_replicas = 2;
  int soft_contexts = 32;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  DetectionConfig detection;
};

struct AteRow {
  std::string graph;
  std::uint64_t seed = 0;
  long samples = 0;
  bool detected = false;  // pair flagged before adjustment
  double true_ate = 0;
  double unadjusted = 0;
  double adjusted = 0;
  double unadjusted_error = 0;
  double adjusted_error = 0;
};

// Exact E[X_outcome | do(X_treat=1)] - E[... do(X_treat=0)] by enumeration.
double true_ate_binary(const BinaryScm& scm, int treat, int outcome);

// Effect of X0 on X1: naive observational contrast vs backdoor adjustment
// over the revealed latent column, against the enumerated truth.
std::vector<AteRow> run_downstream_ate(const DownstreamSpec& spec);

std::string downstream_report_json(const std::vector<AteRow>& rows, const DownstreamSpec& spec);

// --- random-graph detection benchmark ----------------------------------------

struct MetricsRow {
  int n = 0;
  int contexts = 0;
  long samples = 0;
  int setting = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::uint64_t seed = 0;
};

// TP over predicted (0 when nothing predicted), TP over truth, harmonic mean
// (0 when both rates are 0). Pairs are unordered.
MetricsRow precision_recall_f1(const std::set<std::pair<int, int>>& predicted,
                               const std::set<std::pair<int, int>>& truth);

struct ErSpec {
  std::vector<int> n_nodes = {10, 15, 20, 25};
  std::vector<long> sample_sizes = {100, 200, 300, 400, 500};
  std::vector<int> settings = {1, 2, 3};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  // Graph family: edge probability edge_degree/n, latents =
  // max(2, n/latents_divisor) with three children each, children disjoint
  // across latents. The divisor keeps the cross-latent pair pool from
  // swamping the fixed truth set at n=25.
  double edge_degree = 2.0;
  int children_per_latent = 3;
  int latents_divisor = 12;

  // Mechanisms: children of latents swing by latent_gap when the latent
  // flips (their base and observed-parent swings are compressed into the
  // remaining headroom); other children swing by +-[obs_delta_lo,
  // obs_delta_hi] per observed parent.
  double latent_gap = 0.75;
  double base_lo = 0.15;
  double base_hi = 0.45;
  double obs_delta_lo = 0.35;
  double obs_delta_hi = 0.85;

  // Context plans. Setting 1: obs_contexts observational plus two hard
  // contexts (both values) per observed node. Settings 2/3: soft_contexts
  // contexts; each latent redraws its prior with shift_prob, each observed
  // node redraws its mechanism with obs_shift_prob. A latent shift counts as
  // a shift of its children, which is what the stream measures key on.
  int obs_contexts = 2;
  int soft_contexts = 32;
  double shift_prob = 0.50;
  double obs_shift_prob = 0.10;

  // Detection thresholds on the squashed values. Settings 1 and 2 use
  // tau1/tau2 as is. Setting 3 floors tau3 at a per-pair quantile of the
  // stream-permutation null: its conditional streams are short and uneven
  // per stratum, so the null tail varies pair to pair far more than the
  // marginal streams of the other settings.
  double tau1 = 0.05;
  double tau2 = 0.05;
  double tau3 = 0.05;
  double null_quantile = 0.55;
  double null_quantile3 = 0.88;
  int null_trials = 60;

  int threads = 0;  // 0 = hardware concurrency
};

Dag er_benchmark_dag(int n, const ErSpec& spec, std::uint64_t seed);
BinaryScm er_benchmark_scm(const Dag& dag, const ErSpec& spec, std::uint64_t seed);

// Soft-shift plan for settings 2 and 3: per context, every latent redraws its
// prior with latent_prob and every observed node its CPT with obs_prob.
MechanismShiftPlan er_soft_plan(const BinaryScm& scm, int contexts, double latent_prob,
                                double obs_prob, std::uint64_t seed);

// One row per (n, samples, setting, seed); deterministic for a fixed spec,
// whatever the thread count.
std::vector<MetricsRow> run_er_benchmark(const ErSpec& spec);

std::string er_report_json(const std::vector<MetricsRow>& rows, const ErSpec& spec);
std::string er_report_csv(const std::vector<MetricsRow>& rows);

}  // namespace confound
