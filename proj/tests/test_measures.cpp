#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "confound/bench.hpp"
#include "confound/measures.hpp"
#include "confound/rng.hpp"
#include "confound/scm.hpp"

using namespace confound;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

std::optional<Errc> thrown_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// Three observed children of one latent driver: every pair shares the same
// hidden cause and so does the whole set.
BinaryScm star_scm() {
  Dag dag(3);
  const int z = dag.add_latent();
  dag.add_edge(z, 0);
  dag.add_edge(z, 1);
  dag.add_edge(z, 2);
  return BinaryScm(
      dag, {vec({0.12, 0.88}), vec({0.15, 0.85}), vec({0.18, 0.82}), vec({0.5})});
}

// X0 -> X1 -> X2 with no hidden parents anywhere.
BinaryScm chain_scm() {
  Dag dag(3);
  dag.add_edge(0, 1);
  dag.add_edge(1, 2);
  return BinaryScm(dag, {vec({0.5}), vec({0.2, 0.8}), vec({0.3, 0.7})});
}

// Two latents covering the overlapping pairs {0,1} and {1,2}. X0 and X2 are
// unconfounded, so the pairs are confounded but the full set is not jointly.
BinaryScm rungs_scm() {
  Dag dag(3);
  const int za = dag.add_latent();
  const int zb = dag.add_latent();
  dag.add_edge(za, 0);
  dag.add_edge(za, 1);
  dag.add_edge(zb, 1);
  dag.add_edge(zb, 2);
  return BinaryScm(dag, {vec({0.15, 0.85}), vec({0.1, 0.5, 0.5, 0.9}), vec({0.2, 0.8}),
                         vec({0.5}), vec({0.5})});
}

// Two observational contexts, hard contexts on every observed node and value,
// optionally every pair of observed nodes clamped jointly.
MechanismShiftPlan hard_plan(int n_observed, int replicas, bool with_pairs) {
  MechanismShiftPlan plan;
  int id = 0;
  plan.contexts.push_back({id++, {}});
  plan.contexts.push_back({id++, {}});
  for (int t = 0; t < n_observed; ++t)
    for (double v : {0.0, 1.0})
      for (int r = 0; r < replicas; ++r)
        plan.contexts.push_back({id++, {Intervention::hard(t, v)}});
  if (with_pairs)
    for (int a = 0; a < n_observed; ++a)
      for (int b = a + 1; b < n_observed; ++b)
        for (double va : {0.0, 1.0})
          for (double vb : {0.0, 1.0})
            plan.contexts.push_back(
                {id++, {Intervention::hard(a, va), Intervention::hard(b, vb)}});
  return plan;
}

void add_soft(MechanismShiftPlan& plan, const BinaryScm& scm, int n, std::uint64_t seed) {
  const Scm holder = scm;
  Rng rng(derive_seed(seed, 0xd1ceu));
  int id = static_cast<int>(plan.contexts.size());
  for (int c = 0; c < n; ++c) {
    PlanContext ctx{id++, {}};
    for (int z : scm.dag().latent_nodes())
      ctx.interventions.push_back(random_soft_shift(holder, z, rng));
    plan.contexts.push_back(std::move(ctx));
  }
}

MeasureOptions opts_for(const Dag& dag, int k = 10) {
  MeasureOptions mo;
  mo.dag = &dag;
  mo.info.k = k;
  return mo;
}

const Dag& star_dag() {
  static const Dag d = star_scm().dag();
  return d;
}

const ContextSuite& star_suite() {
  static const ContextSuite s = [] {
    const BinaryScm scm = star_scm();
    MechanismShiftPlan plan = hard_plan(3, 2, true);
    add_soft(plan, scm, 240, 11);
    return generate_context_suite(scm, plan, 4000, 11, true);
  }();
  return s;
}

const Dag& chain_dag() {
  static const Dag d = chain_scm().dag();
  return d;
}

const ContextSuite& chain_suite() {
  static const ContextSuite s =
      generate_context_suite(chain_scm(), hard_plan(3, 2, false), 20000, 5);
  return s;
}

const ContextSuite& rungs_suite() {
  static const ContextSuite s = [] {
    const BinaryScm scm = rungs_scm();
    MechanismShiftPlan plan;
    plan.contexts.push_back({0, {}});
    plan.contexts.push_back({1, {}});
    add_soft(plan, scm, 240, 3);
    return generate_context_suite(scm, plan, 1500, 3, true);
  }();
  return s;
}

const Dag& fork_dag() {
  static const Dag d = three_node_dag(ThreeNodeGraph::g3);
  return d;
}

// Shared latent parent, no edge between the observed pair.
const ContextSuite& fork_suite() {
  static const ContextSuite s = three_node_suite(ThreeNodeGraph::g3, 3000, 2, 240, 7);
  return s;
}

const Dag& edge_fork_dag() {
  static const Dag d = three_node_dag(ThreeNodeGraph::g4);
  return d;
}

// Shared latent parent plus the direct edge X0 -> X1.
const ContextSuite& edge_fork_suite() {
  static const ContextSuite s = three_node_suite(ThreeNodeGraph::g4, 5000, 2, 240, 7);
  return s;
}

// Direct edge only; the latent is disconnected so soft contexts shift nothing.
const ContextSuite& edge_only_suite() {
  static const ContextSuite s = three_node_suite(ThreeNodeGraph::g2, 2000, 2, 12, 7);
  return s;
}

// Two distinct latent parents both covering the same observed pair.
const ContextSuite& double_fork_suite() {
  static const ContextSuite s = three_node_suite(ThreeNodeGraph::g5, 3000, 2, 240, 7);
  return s;
}

// Every context soft-shifts the cause's mechanism only, but the recorded
// metadata claims the effect moved too. The conditional P(X1 | X0) never
// changes, which only a direction-aware score can exploit.
const ContextSuite& overclaimed_suite() {
  static const ContextSuite s = [] {
    Dag dag(2);
    dag.add_edge(0, 1);
    const BinaryScm scm(dag, {vec({0.5}), vec({0.2, 0.8})});
    const Scm holder = scm;
    MechanismShiftPlan plan;
    Rng rng(derive_seed(21, 0xfaceu));
    for (int c = 0; c < 160; ++c)
      plan.contexts.push_back({c, {random_soft_shift(holder, 0, rng)}});
    ContextSuite suite = generate_context_suite(scm, plan, 2500, 21);
    for (auto& meta : suite.metas) meta.shifted = {0, 1};
    return suite;
  }();
  return s;
}

}  // namespace

TEST_CASE("interventional pair score squashes the smaller directed information") {
  const auto mo = opts_for(edge_fork_dag());
  const CnfValue v = cnf1_pair(edge_fork_suite(), 0, 1, mo);
  CHECK(v.setting == 1);
  CHECK(v.members == std::vector<int>{0, 1});
  REQUIRE(v.components.size() == 2);
  CHECK(v.info == std::min(v.components[0].value, v.components[1].value));
  CHECK(v.value == 1.0 - std::exp(-v.info));
  CHECK(v.value > 0.05);
  CHECK(v.value < 1.0);
  CHECK(v.contexts_used > 0);

  const CnfValue w = cnf1_pair(edge_fork_suite(), 1, 0, mo);
  CHECK(w.value == v.value);  // min of the same two estimates, swapped
  CHECK(w.components[0].value == v.components[1].value);
  CHECK(w.components[1].value == v.components[0].value);
}

TEST_CASE("pair score of a variable with itself is zero") {
  const CnfValue v = cnf1_pair(edge_fork_suite(), 1, 1, opts_for(edge_fork_dag()));
  CHECK(v.value == 0.0);
  CHECK(v.info == 0.0);
  CHECK(v.components.empty());
}

TEST_CASE("conditioning on the revealed common parent drains the interventional score") {
  const auto mo = opts_for(edge_fork_dag());
  const CnfValue plain = cnf1_pair(edge_fork_suite(), 0, 1, mo);
  const CnfValue given_z = cnf1_conditional(edge_fork_suite(), 0, 1, {2}, mo);
  CHECK(plain.value > 0.05);
  CHECK(given_z.value < 0.05);
  CHECK(given_z.conditioning == std::vector<int>{2});
}

TEST_CASE("measures reject unknown columns and malformed sets") {
  const auto& s = edge_fork_suite();
  CHECK(thrown_code([&] { cnf1_pair(s, 0, 9); }) == Errc::unknown_column);
  CHECK(thrown_code([&] { cnf1_pair(s, 2, 0); }) == Errc::unknown_column);  // latent column
  CHECK(thrown_code([&] { cnf2_conditional(s, 0, 1, {9}); }) == Errc::unknown_column);
  CHECK(thrown_code([&] { cnf1_joint(s, {0}); }) == Errc::invalid_set_size);
  CHECK(thrown_code([&] { cnf2_joint(s, {0, 0, 1}); }) == Errc::invalid_set_size);
  CHECK(thrown_code([&] { thm1_joint_unconfounded_test(s, {0, 1}, 0.02); }) ==
        Errc::invalid_set_size);
  // A suite without observational contexts cannot anchor setting 1.
  CHECK(thrown_code([&] { cnf1_pair(overclaimed_suite(), 0, 1); }) == Errc::empty_context_set);
}

TEST_CASE("stream scores need enough jointly shifted contexts") {
  // The disconnected latent never marks anything as shifted, so there is no
  // joint shift evidence at all; the scores say so instead of guessing.
  const auto& s = edge_only_suite();
  CHECK(thrown_code([&] { cnf2_pair(s, 0, 1); }) == Errc::insufficient_contexts);
  CHECK(thrown_code([&] { cnf3_pair(s, 0, 1, Direction::i_to_j); }) ==
        Errc::insufficient_contexts);
  CHECK(thrown_code([&] { cnf2_joint(s, {0, 1}); }) == Errc::insufficient_contexts);
}

TEST_CASE("expectation streams expose a shared latent driver") {
  MeasureOptions mo;
  mo.info.k = 10;
  const CnfValue v = cnf2_pair(fork_suite(), 0, 1, mo);
  CHECK(v.setting == 2);
  CHECK(v.value > 0.5);
  CHECK(v.value == 1.0 - std::exp(-v.info));
  CHECK(v.contexts_used == 240);
  REQUIRE(v.components.size() == 1);
  CHECK(v.components[0].sample_count == 240);

  const CnfValue w = cnf2_pair(fork_suite(), 1, 0, mo);
  CHECK(w.value == v.value);  // content-keyed estimation is order-invariant

  // Without a known direction the third setting is the second one verbatim.
  const CnfValue u = cnf3_pair(fork_suite(), 0, 1, Direction::none_known, mo);
  CHECK(u.setting == 3);
  CHECK(u.value == v.value);
  CHECK(u.info == v.info);
}

TEST_CASE("reflexive stream score squashes the clamped stream entropy") {
  MeasureOptions mo;
  mo.info.k = 10;
  const CnfValue v = cnf2_pair(fork_suite(), 0, 0, mo);
  CHECK(v.members == std::vector<int>{0, 0});
  CHECK(v.info >= 0.0);
  CHECK(v.value >= 0.0);
  CHECK(v.value < 1.0);
  CHECK(v.value == 1.0 - std::exp(-v.info));
  REQUIRE(v.components.size() == 1);
}

TEST_CASE("direction aware stream score is stable under argument swap") {
  MeasureOptions mo;
  mo.info.k = 10;
  const CnfValue a = cnf3_pair(edge_fork_suite(), 0, 1, Direction::i_to_j, mo);
  const CnfValue b = cnf3_pair(edge_fork_suite(), 1, 0, Direction::j_to_i, mo);
  CHECK(a.value > 0.05);  // latent parent moves mechanism and marginal together
  CHECK(a.value == b.value);
  CHECK(a.info == b.info);
}

TEST_CASE("conditioning a stream on the responsible latent kills the score") {
  MeasureOptions mo;
  mo.info.k = 10;
  const CnfValue plain = cnf2_pair(fork_suite(), 0, 1, mo);
  const CnfValue given_z = cnf2_conditional(fork_suite(), 0, 1, {2}, mo);
  CHECK(plain.value > 0.05);
  CHECK(given_z.value < 0.05);
  CHECK(given_z.conditioning == std::vector<int>{2});

  // With two overlapping latent parents, removing either one still leaves the
  // other driver visible.
  const CnfValue both = cnf2_pair(double_fork_suite(), 0, 1, mo);
  const CnfValue wo_first = cnf2_conditional(double_fork_suite(), 0, 1, {2}, mo);
  const CnfValue wo_second = cnf2_conditional(double_fork_suite(), 0, 1, {3}, mo);
  CHECK(both.value > 0.05);
  CHECK(wo_first.value > 0.05);
  CHECK(wo_second.value > 0.05);
}

TEST_CASE("overstated shift metadata fools the marginal stream but not the directed one") {
  const auto& s = overclaimed_suite();
  MeasureOptions mo;
  mo.info.k = 10;

  // The effect's conditional mechanism really is constant across contexts.
  const auto ids = select_contexts(s.metas, {0, 1}, {}, SelectMode::and_all);
  REQUIRE(static_cast<int>(ids.size()) == 160);
  const auto cond = conditional_context_expectations(s, ids, 1, 0);
  for (Eigen::Index c = 0; c < cond.values.rows(); ++c) {
    CHECK(std::abs(cond.values(c, 0) - 0.2) < 0.1);
    CHECK(std::abs(cond.values(c, 1) - 0.8) < 0.1);
  }

  // Marginal streams co-move through the cause and report confounding that
  // is not there; the mechanism stream stays flat and does not.
  const CnfValue marginal = cnf2_pair(s, 0, 1, mo);
  const CnfValue directed = cnf3_pair(s, 0, 1, Direction::i_to_j, mo);
  CHECK(marginal.value > 0.3);
  CHECK(directed.value < 0.05);
}

TEST_CASE("joint interventional score sums the split contributions") {
  const auto mo = opts_for(star_dag());
  const CnfValue j = cnf1_joint(star_suite(), {0, 1, 2}, mo);
  CHECK(j.setting == 1);
  CHECK(j.members == std::vector<int>{0, 1, 2});
  REQUIRE(j.components.size() == 6);  // two directions per split
  CHECK(j.value == 1.0 - std::exp(-j.info));
  CHECK(j.value > 0.05);
  // Squashing is concave, so the squashed sum never exceeds the summed squash.
  CHECK(j.component_value_sum >= j.value);

  const CnfValue pair_via_joint = cnf1_joint(star_suite(), {0, 1}, mo);
  const CnfValue pair = cnf1_pair(star_suite(), 0, 1, mo);
  CHECK(pair_via_joint.value == pair.value);
  CHECK(pair_via_joint.members == std::vector<int>{0, 1});
}

TEST_CASE("triple test accepts a pure causal chain and rejects a shared driver") {
  const TripleTestResult chain =
      thm1_joint_unconfounded_test(chain_suite(), {0, 1, 2}, 0.02, opts_for(chain_dag()));
  CHECK(chain.verdict);
  CHECK(chain.statistic <= 0.02);
  CHECK(chain.threshold == 0.02);

  const TripleTestResult star =
      thm1_joint_unconfounded_test(star_suite(), {0, 1, 2}, 0.02, opts_for(star_dag()));
  CHECK_FALSE(star.verdict);
  CHECK(star.statistic > 0.02);  // smallest gap found still clears the tolerance
}

TEST_CASE("stream triple test demands a driver common to every triple") {
  MeasureOptions mo;
  mo.info.k = 10;
  const TripleTestResult star = thm3_joint_confounded_test(star_suite(), {0, 1, 2}, 0.15, mo);
  CHECK(star.verdict);
  CHECK(star.statistic > 0.15);

  const TripleTestResult rungs = thm3_joint_confounded_test(rungs_suite(), {0, 1, 2}, 0.15, mo);
  CHECK_FALSE(rungs.verdict);
  CHECK(rungs.statistic <= 0.15);
}

TEST_CASE("directed stream triple test mirrors the verdicts and requires orientations") {
  MeasureOptions mo;
  mo.info.k = 10;
  std::map<std::pair<int, int>, Direction> dirs{{{0, 1}, Direction::i_to_j},
                                                {{0, 2}, Direction::i_to_j},
                                                {{1, 2}, Direction::i_to_j}};
  const TripleTestResult star =
      thm5_joint_confounded_test(star_suite(), {0, 1, 2}, dirs, 0.15, mo);
  CHECK(star.verdict);

  const TripleTestResult rungs =
      thm5_joint_confounded_test(rungs_suite(), {0, 1, 2}, dirs, 0.15, mo);
  CHECK_FALSE(rungs.verdict);

  std::map<std::pair<int, int>, Direction> missing{{{0, 1}, Direction::i_to_j},
                                                   {{1, 2}, Direction::i_to_j}};
  CHECK(thrown_code([&] {
          thm5_joint_confounded_test(star_suite(), {0, 1, 2}, missing, 0.15, mo);
        }) == Errc::direction_required);
  std::map<std::pair<int, int>, Direction> vague = dirs;
  vague[{0, 2}] = Direction::none_known;
  CHECK(thrown_code([&] {
          thm5_joint_confounded_test(star_suite(), {0, 1, 2}, vague, 0.15, mo);
        }) == Errc::direction_required);
}

TEST_CASE("detection uses a strict threshold or a shuffled null quantile") {
  CnfValue v;
  v.value = 0.06;
  CHECK(detect(v, {}));
  v.value = 0.05;
  CHECK_FALSE(detect(v, {}));  // strictly greater than

  DetectionConfig cfg;
  cfg.trials = 20;
  cfg.seed = 4;

  const auto mo1 = opts_for(edge_fork_dag());
  const double thr1 = null_quantile_threshold(edge_fork_suite(), 0, 1, 1, cfg, mo1);
  CHECK(thr1 >= 0.0);
  CHECK(thr1 < cnf1_pair(edge_fork_suite(), 0, 1, mo1).value);
  CHECK(thr1 == null_quantile_threshold(edge_fork_suite(), 0, 1, 1, cfg, mo1));

  MeasureOptions mo2;
  mo2.info.k = 10;
  const double thr2 = null_quantile_threshold(fork_suite(), 0, 1, 2, cfg, mo2);
  const double thr3 = null_quantile_threshold(fork_suite(), 0, 1, 3, cfg, mo2);
  CHECK(thr2 == thr3);  // the stream permutation null is shared
  CHECK(thr2 < cnf2_pair(fork_suite(), 0, 1, mo2).value);

  CHECK(thrown_code([&] { null_quantile_threshold(fork_suite(), 0, 1, 5, cfg); }) ==
        Errc::invalid_set_size);
  DetectionConfig none = cfg;
  none.trials = 0;
  CHECK(thrown_code([&] { null_quantile_threshold(fork_suite(), 0, 1, 2, none); }) ==
        Errc::invalid_set_size);
}
