#include "confound/scm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace confound {

namespace {

int cpt_rows(const Dag& dag, int v) { return 1 << dag.parents(v).size(); }

void validate_cpt(const Dag& dag, int v, const Eigen::VectorXd& cpt) {
  if (cpt.size() != cpt_rows(dag, v))
    throw Error(Errc::invalid_intervention_value,
                "cpt for node " + std::to_string(v) + " needs " +
                    std::to_string(cpt_rows(dag, v)) + " rows, got " +
                    std::to_string(cpt.size()));
  for (Eigen::Index r = 0; r < cpt.size(); ++r)
    if (!(cpt[r] >= 0.0 && cpt[r] <= 1.0))
      throw Error(Errc::invalid_intervention_value, "cpt entry outside [0,1]");
}

}  // namespace

BinaryScm::BinaryScm(Dag dag, std::vector<Eigen::VectorXd> cpts)
    : dag_(std::move(dag)), cpts_(std::move(cpts)), forced_(dag_.n_nodes()) {
  if (static_cast<int>(cpts_.size()) != dag_.n_nodes())
    throw Error(Errc::unknown_node, "one cpt per node required");
  for (int v = 0; v < dag_.n_nodes(); ++v) validate_cpt(dag_, v, cpts_[v]);
}

const Eigen::VectorXd& BinaryScm::cpt(int v) const {
  if (v < 0 || v >= dag_.n_nodes()) throw Error(Errc::unknown_node, "bad node");
  return cpts_[v];
}

void BinaryScm::set_cpt(int v, Eigen::VectorXd cpt) {
  validate_cpt(dag_, v, cpt);
  cpts_[v] = std::move(cpt);
}

BinaryScm BinaryScm::apply(const Intervention& iv) const {
  if (iv.target < 0 || iv.target >= dag_.n_nodes())
    throw Error(Errc::unknown_node, "intervention target out of range");
  BinaryScm out = *this;
  if (const auto* hard = std::get_if<HardChange>(&iv.change)) {
    if (dag_.is_latent(iv.target))
      throw Error(Errc::invalid_intervention_value, "hard interventions only on observed nodes");
    if (hard->value != 0.0 && hard->value != 1.0)
      throw Error(Errc::invalid_intervention_value, "binary hard value must be 0 or 1");
    out.forced_[iv.target] = hard->value;
  } else if (const auto* soft = std::get_if<SoftBinaryChange>(&iv.change)) {
    validate_cpt(dag_, iv.target, soft->cpt);
    out.cpts_[iv.target] = soft->cpt;
  } else {
    throw Error(Errc::invalid_intervention_value, "linear shift applied to binary model");
  }
  return out;
}

SampleTable BinaryScm::sample(long n, std::uint64_t seed, bool include_latents) const {
  const auto order = dag_.topological_order();
  Eigen::MatrixXd all(n, dag_.n_nodes());
  // One noise stream per node, derived from the master seed. Interventions on
  // other nodes then leave a node's draws untouched, so intervened and base
  // samples are counterfactually coupled outside the intervention's cone.
  for (int v : order) {
    if (forced_[v]) {
      all.col(v).setConstant(*forced_[v]);
      continue;
    }
    const auto& pa = dag_.parents(v);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(v)));
    for (long r = 0; r < n; ++r) {
      int row = 0;
      for (size_t k = 0; k < pa.size(); ++k)
        if (all(r, pa[k]) > 0.5) row |= 1 << k;
      all(r, v) = uniform01(rng) < cpts_[v][row] ? 1.0 : 0.0;
    }
  }
  SampleTable out;
  const int keep = include_latents ? dag_.n_nodes() : dag_.n_observed();
  out.values = all.leftCols(keep);
  for (int v = 0; v < keep; ++v) out.columns.push_back(dag_.node_name(v));
  return out;
}

Eigen::VectorXd BinaryScm::exact_joint() const {
  const int m = dag_.n_nodes();
  if (m > 20) throw Error(Errc::invalid_set_size, "exact joint limited to 20 nodes");
  Eigen::VectorXd p(1 << m);
  std::vector<std::vector<int>> pa(m);
  for (int v = 0; v < m; ++v) pa[v] = dag_.parents(v);
  for (int atom = 0; atom < (1 << m); ++atom) {
    double prob = 1.0;
    for (int v = 0; v < m && prob > 0; ++v) {
      const int val = atom >> v & 1;
      if (forced_[v]) {
        if (val != static_cast<int>(*forced_[v])) prob = 0.0;
        continue;
      }
      int row = 0;
      for (size_t k = 0; k < pa[v].size(); ++k)
        if (atom >> pa[v][k] & 1) row |= 1 << k;
      prob *= val ? cpts_[v][row] : 1.0 - cpts_[v][row];
    }
    p[atom] = prob;
  }
  return p;
}

LinearGaussianScm::LinearGaussianScm(Dag dag, std::map<std::pair<int, int>, double> weights,
                                     Eigen::VectorXd noise_mean, Eigen::VectorXd noise_std)
    : dag_(std::move(dag)),
      weights_(std::move(weights)),
      noise_mean_(std::move(noise_mean)),
      noise_std_(std::move(noise_std)),
      forced_(dag_.n_nodes()) {
  if (noise_mean_.size() != dag_.n_nodes() || noise_std_.size() != dag_.n_nodes())
    throw Error(Errc::unknown_node, "noise parameter length mismatch");
  for (const auto& [pc, w] : weights_)
    if (!dag_.has_edge(pc.first, pc.second))
      throw Error(Errc::unknown_node, "weight on a missing edge");
  for (const auto& [p, c] : dag_.edges())
    if (!weights_.count({p, c})) throw Error(Errc::unknown_node, "edge without weight");
  for (Eigen::Index v = 0; v < noise_std_.size(); ++v)
    if (!(noise_std_[v] > 0)) throw Error(Errc::invalid_intervention_value, "noise std must be > 0");
}

double LinearGaussianScm::weight(int parent, int child) const {
  auto it = weights_.find({parent, child});
  if (it == weights_.end()) throw Error(Errc::unknown_node, "no such edge weight");
  return it->second;
}

LinearGaussianScm LinearGaussianScm::apply(const Intervention& iv) const {
  if (iv.target < 0 || iv.target >= dag_.n_nodes())
    throw Error(Errc::unknown_node, "intervention target out of range");
  LinearGaussianScm out = *this;
  if (const auto* hard = std::get_if<HardChange>(&iv.change)) {
    if (dag_.is_latent(iv.target))
      throw Error(Errc::invalid_intervention_value, "hard interventions only on observed nodes");
    if (!std::isfinite(hard->value))
      throw Error(Errc::invalid_intervention_value, "hard value must be finite");
    out.forced_[iv.target] = hard->value;
  } else if (const auto* soft = std::get_if<SoftLinearChange>(&iv.change)) {
    if (!(soft->noise_std > 0) || !std::isfinite(soft->noise_mean))
      throw Error(Errc::invalid_intervention_value, "bad soft shift parameters");
    out.noise_mean_[iv.target] = soft->noise_mean;
    out.noise_std_[iv.target] = soft->noise_std;
  } else {
    throw Error(Errc::invalid_intervention_value, "binary shift applied to linear model");
  }
  return out;
}

SampleTable LinearGaussianScm::sample(long n, std::uint64_t seed, bool include_latents) const {
  const auto order = dag_.topological_order();
  Eigen::MatrixXd all(n, dag_.n_nodes());
  // Per-node noise streams, same coupling rationale as the binary sampler.
  for (int v : order) {
    if (forced_[v]) {
      all.col(v).setConstant(*forced_[v]);
      continue;
    }
    const auto& pa = dag_.parents(v);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(v)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (long r = 0; r < n; ++r) {
      double x = noise_mean_[v] + noise_std_[v] * gauss(rng);
      for (int u : pa) x += weights_.at({u, v}) * all(r, u);
      all(r, v) = x;
    }
  }
  SampleTable out;
  const int keep = include_latents ? dag_.n_nodes() : dag_.n_observed();
  out.values = all.leftCols(keep);
  for (int v = 0; v < keep; ++v) out.columns.push_back(dag_.node_name(v));
  return out;
}

Eigen::VectorXd LinearGaussianScm::exact_mean() const {
  Eigen::VectorXd mean(dag_.n_nodes());
  for (int v : dag_.topological_order()) {
    if (forced_[v]) {
      mean[v] = *forced_[v];
      continue;
    }
    double m = noise_mean_[v];
    for (int u : dag_.parents(v)) m += weights_.at({u, v}) * mean[u];
    mean[v] = m;
  }
  return mean;
}

Scm build_random_scm(const Dag& dag, ScmFamily family, std::uint64_t seed) {
  Rng rng(seed);
  if (family == ScmFamily::binary) {
    std::vector<Eigen::VectorXd> cpts(dag.n_nodes());
    for (int v = 0; v < dag.n_nodes(); ++v) {
      Eigen::VectorXd cpt(cpt_rows(dag, v));
      for (Eigen::Index r = 0; r < cpt.size(); ++r) cpt[r] = uniform_in(rng, 0.1, 0.9);
      cpts[v] = cpt;
    }
    return BinaryScm(dag, std::move(cpts));
  }
  std::map<std::pair<int, int>, double> w;
  for (const auto& e : dag.edges()) {
    const double mag = uniform_in(rng, 0.5, 1.5);
    w[e] = uniform01(rng) < 0.5 ? -mag : mag;
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dag.n_nodes());
  Eigen::VectorXd std(dag.n_nodes());
  for (int v = 0; v < dag.n_nodes(); ++v) std[v] = uniform_in(rng, 0.5, 1.5);
  return LinearGaussianScm(dag, std::move(w), std::move(mean), std::move(std));
}

Scm apply_intervention(const Scm& scm, const Intervention& iv) {
  return std::visit([&](const auto& m) -> Scm { return m.apply(iv); }, scm);
}

SampleTable sample(const Scm& scm, long n, std::uint64_t seed, bool include_latents) {
  return std::visit([&](const auto& m) { return m.sample(n, seed, include_latents); }, scm);
}

const Dag& scm_dag(const Scm& scm) {
  return std::visit([](const auto& m) -> const Dag& { return m.dag(); }, scm);
}

Intervention random_soft_shift(const Scm& scm, int target, Rng& rng) {
  if (std::holds_alternative<BinaryScm>(scm)) {
    const auto& m = std::get<BinaryScm>(scm);
    Eigen::VectorXd cpt(m.cpt(target).size());
    for (Eigen::Index r = 0; r < cpt.size(); ++r) cpt[r] = uniform_in(rng, 0.1, 0.9);
    return Intervention::soft_binary(target, std::move(cpt));
  }
  return Intervention::soft_linear(target, uniform_in(rng, -3.0, 3.0), uniform_in(rng, 0.5, 2.0));
}

MechanismShiftPlan auto_plan(const Scm& scm, int n_contexts, double shift_prob,
                             std::uint64_t seed) {
  const Dag& dag = scm_dag(scm);
  Rng rng(seed);
  MechanismShiftPlan plan;
  plan.shift_prob = shift_prob;
  for (int c = 0; c < n_contexts; ++c) {
    PlanContext ctx;
    ctx.id = c;
    for (int v = 0; v < dag.n_nodes(); ++v)
      if (uniform01(rng) < shift_prob) ctx.interventions.push_back(random_soft_shift(scm, v, rng));
    plan.contexts.push_back(std::move(ctx));
  }
  return plan;
}

ContextSuite generate_context_suite(const Scm& scm, const MechanismShiftPlan& plan,
                                    long samples_per_context, std::uint64_t seed,
                                    bool include_latents) {
  const Dag& dag = scm_dag(scm);
  ContextSuite suite;
  suite.n_observed = dag.n_observed();
  const int keep = include_latents ? dag.n_nodes() : dag.n_observed();
  for (int v = 0; v < keep; ++v) suite.columns.push_back(dag.node_name(v));

  for (const auto& ctx : plan.contexts) {
    Scm shifted = scm;
    ContextMeta meta;
    meta.id = ctx.id;
    std::set<int> moved;
    for (const auto& iv : ctx.interventions) {
      shifted = apply_intervention(shifted, iv);
      InterventionRecord rec;
      rec.target = iv.target;
      rec.kind = iv.is_hard() ? InterventionRecord::Kind::hard : InterventionRecord::Kind::soft;
      if (const auto* hard = std::get_if<HardChange>(&iv.change)) rec.value = hard->value;
      meta.interventions.push_back(rec);
      if (dag.is_latent(iv.target)) {
        for (int child : dag.children(iv.target)) moved.insert(child);
      } else {
        moved.insert(iv.target);
      }
    }
    meta.shifted.assign(moved.begin(), moved.end());
    meta.observational = ctx.interventions.empty();
    SampleTable table = sample(shifted, samples_per_context, derive_seed(seed, ctx.id), include_latents);
    suite.metas.push_back(std::move(meta));
    suite.tables.push_back(std::move(table));
  }
  return suite;
}

}  // namespace confound
