#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "confound/contexts.hpp"
#include "confound/graph.hpp"
#include "confound/rng.hpp"

namespace confound {

// Intervention payloads. Hard: clamp the target to one support value (observed
// nodes only). Soft: replace the target's mechanism parameters while keeping
// its parent set.
struct HardChange {
  double value = 0;
};
struct SoftBinaryChange {
  Eigen::VectorXd cpt;  // P(X=1 | parent row), 2^|parents| entries
};
struct SoftLinearChange {
  double noise_mean = 0;
  double noise_std = 1;
};

struct Intervention {
  int target = -1;
  std::variant<HardChange, SoftBinaryChange, SoftLinearChange> change;

  static Intervention hard(int target, double value) { return {target, HardChange{value}}; }
  static Intervention soft_binary(int target, Eigen::VectorXd cpt) {
    return {target, SoftBinaryChange{std::move(cpt)}};
  }
  static Intervention soft_linear(int target, double mean, double std) {
    return {target, SoftLinearChange{mean, std}};
  }
  bool is_hard() const { return std::holds_alternative<HardChange>(change); }
};

// Binary structural model: every node carries P(X=1 | parents) with parent
// rows indexed as sum(value(pa_k) << k) over parents in ascending node order.
class BinaryScm {
 public:
  BinaryScm() = default;
  BinaryScm(Dag dag, std::vector<Eigen::VectorXd> cpts);

  const Dag& dag() const { return dag_; }
  const Eigen::VectorXd& cpt(int v) const;
  void set_cpt(int v, Eigen::VectorXd cpt);
  const std::optional<double>& forced(int v) const { return forced_[v]; }

  BinaryScm apply(const Intervention& iv) const;
  SampleTable sample(long n, std::uint64_t seed, bool include_latents = false) const;

  // Exact joint over all nodes by atom enumeration (node count <= 20); hard
  // clamps contribute indicator factors (truncated factorization).
  Eigen::VectorXd exact_joint() const;  // 2^n_nodes atoms, node v = bit v

 private:
  Dag dag_;
  std::vector<Eigen::VectorXd> cpts_;
  std::vector<std::optional<double>> forced_;
};

// Linear-Gaussian model: X_v = sum_u w_uv X_u + eps_v, eps_v ~ N(mean, std^2).
// Root nodes are pure noise, so their noise mean/std are the root location and
// scale parameters; a soft shift of a root moves exactly those.
class LinearGaussianScm {
 public:
  LinearGaussianScm() = default;
  LinearGaussianScm(Dag dag, std::map<std::pair<int, int>, double> weights,
                    Eigen::VectorXd noise_mean, Eigen::VectorXd noise_std);

  const Dag& dag() const { return dag_; }
  double weight(int parent, int child) const;
  double noise_mean(int v) const { return noise_mean_[v]; }
  double noise_std(int v) const { return noise_std_[v]; }
  const std::optional<double>& forced(int v) const { return forced_[v]; }

  LinearGaussianScm apply(const Intervention& iv) const;
  SampleTable sample(long n, std::uint64_t seed, bool include_latents = false) const;

  Eigen::VectorXd exact_mean() const;  // E[X_v] accounting for clamps

 private:
  Dag dag_;
  std::map<std::pair<int, int>, double> weights_;
  Eigen::VectorXd noise_mean_, noise_std_;
  std::vector<std::optional<double>> forced_;
};

using Scm = std::variant<BinaryScm, LinearGaussianScm>;

enum class ScmFamily { binary, linear_gaussian };

// Random mechanisms: binary CPT entries ~ U[0.1, 0.9]; linear weights have
// magnitude U[0.5, 1.5] with random sign, noise stds U[0.5, 1.5], means 0.
Scm build_random_scm(const Dag& dag, ScmFamily family, std::uint64_t seed);

Scm apply_intervention(const Scm& scm, const Intervention& iv);
SampleTable sample(const Scm& scm, long n, std::uint64_t seed, bool include_latents = false);
const Dag& scm_dag(const Scm& scm);

// Fresh soft-shift parameters from the family's shift priors: binary rows
// redrawn U[0.1, 0.9]; linear mean U[-3, 3], std U[0.5, 2].
Intervention random_soft_shift(const Scm& scm, int target, Rng& rng);

struct PlanContext {
  int id = 0;
  std::vector<Intervention> interventions;
};

struct MechanismShiftPlan {
  std::vector<PlanContext> contexts;
  double shift_prob = 0;  // informational, for auto-generated plans
};

// Every node (observed and latent) receives an independent soft shift with
// probability shift_prob in each context.
MechanismShiftPlan auto_plan(const Scm& scm, int n_contexts, double shift_prob,
                             std::uint64_t seed);

// Applies each planned context's interventions and samples it. Shift metadata
// records observed targets directly and latent targets as shifts of all their
// observed children; a context with no interventions is observational.
ContextSuite generate_context_suite(const Scm& scm, const MechanismShiftPlan& plan,
                                    long samples_per_context, std::uint64_t seed,
                                    bool include_latents = false);

}  // namespace confound
