#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "confound/bench.hpp"
#include "confound/scm.hpp"
#include "oracle.hpp"

using namespace confound;

namespace {

std::vector<Eigen::VectorXd> all_cpts(const BinaryScm& scm) {
  std::vector<Eigen::VectorXd> out;
  for (int v = 0; v < scm.dag().n_nodes(); ++v) out.push_back(scm.cpt(v));
  return out;
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Fork Z -> X0, Z -> X1 with Z last so observed columns come first.
BinaryScm fork_scm() {
  Dag dag(2);
  int z = dag.add_latent();
  dag.add_edge(z, 0);
  dag.add_edge(z, 1);
  return BinaryScm(dag, {vec({0.2, 0.8}), vec({0.3, 0.9}), vec({0.5})});
}

}  // namespace

TEST_CASE("cpt validation rejects wrong shapes and ranges") {
  Dag dag(2);
  dag.add_edge(0, 1);
  CHECK_THROWS_AS(BinaryScm(dag, {vec({0.5}), vec({0.4})}), Error);          // needs 2 rows
  CHECK_THROWS_AS(BinaryScm(dag, {vec({0.5}), vec({0.2, 1.4})}), Error);     // out of [0,1]
  BinaryScm ok(dag, {vec({0.5}), vec({0.2, 0.8})});
  CHECK_THROWS_AS(ok.set_cpt(1, vec({0.5})), Error);
  CHECK_THROWS_AS(ok.cpt(7), Error);
}

TEST_CASE("sampling is reproducible and seed sensitive") {
  BinaryScm scm = fork_scm();
  auto a = scm.sample(400, 9, true);
  auto b = scm.sample(400, 9, true);
  auto c = scm.sample(400, 10, true);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  CHECK(a.cols() == 3);
  CHECK(scm.sample(400, 9, false).cols() == 2);
  CHECK(a.columns == std::vector<std::string>{"X0", "X1", "Z2"});
}

TEST_CASE("exact joint matches independent enumeration") {
  for (auto g : {ThreeNodeGraph::g1, ThreeNodeGraph::g3, ThreeNodeGraph::g4, ThreeNodeGraph::g5}) {
    BinaryScm scm = three_node_scm(g);
    Eigen::VectorXd lib = scm.exact_joint();
    Eigen::VectorXd ref = oracle::enumerate_joint(scm.dag(), all_cpts(scm));
    REQUIRE(lib.size() == ref.size());
    CHECK((lib - ref).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(lib.sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("hard intervention clamps the target and only affects descendants") {
  BinaryScm scm = three_node_scm(ThreeNodeGraph::g4);  // Z -> X0, Z -> X1, X0 -> X1
  BinaryScm cut = scm.apply(Intervention::hard(0, 1.0));
  CHECK(cut.forced(0).has_value());

  auto base = scm.sample(2000, 3, true);
  auto done = cut.sample(2000, 3, true);
  CHECK((done.values.col(0).array() == 1.0).all());
  // Z is not a descendant of X0: its draws are untouched.
  CHECK(base.values.col(2) == done.values.col(2));
  // X1 is a descendant and must move: P(X1=1|do(X0=1)) averages rows {1,3}.
  const Eigen::VectorXd x1 = three_node_scm(ThreeNodeGraph::g4).cpt(1);
  const double want = 0.5 * (x1[1] + x1[3]);
  CHECK(std::abs(done.values.col(1).mean() - want) < 0.04);

  CHECK_THROWS_AS(scm.apply(Intervention::hard(0, 0.5)), Error);  // not in support
  CHECK_THROWS_AS(scm.apply(Intervention::hard(9, 1.0)), Error);
}

TEST_CASE("soft intervention replaces one mechanism in place") {
  BinaryScm scm = fork_scm();
  BinaryScm shifted = scm.apply(Intervention::soft_binary(1, vec({0.05, 0.95})));
  CHECK(shifted.cpt(1) == vec({0.05, 0.95}));
  CHECK(shifted.cpt(0) == scm.cpt(0));

  auto base = scm.sample(3000, 8, true);
  auto moved = shifted.sample(3000, 8, true);
  // Non-target columns keep their exact draws (per-node streams).
  CHECK(base.values.col(0) == moved.values.col(0));
  CHECK(base.values.col(2) == moved.values.col(2));
  CHECK(base.values.col(1) != moved.values.col(1));

  CHECK_THROWS_AS(scm.apply(Intervention::soft_binary(1, vec({0.1, 0.2, 0.3, 0.4}))), Error);
}

TEST_CASE("independent nodes sample independently") {
  BinaryScm scm = three_node_scm(ThreeNodeGraph::g1);  // no edges at all
  auto t = scm.sample(20000, 5);
  long c[2][2] = {};
  for (long r = 0; r < t.rows(); ++r)
    ++c[static_cast<int>(t.values(r, 0))][static_cast<int>(t.values(r, 1))];
  const double n = static_cast<double>(t.rows());
  double chi2 = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double expect = (c[a][0] + c[a][1]) * (c[0][b] + c[1][b]) / n;
      chi2 += (c[a][b] - expect) * (c[a][b] - expect) / expect;
    }
  boost::math::chi_squared dist(1);
  CHECK(chi2 < boost::math::quantile(dist, 0.999));
}

TEST_CASE("sample frequencies track the exact joint") {
  BinaryScm scm = fork_scm();
  auto t = scm.sample(50000, 12, true);
  Eigen::VectorXd ref = oracle::enumerate_joint(scm.dag(), all_cpts(scm));
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(8);
  for (long r = 0; r < t.rows(); ++r) {
    long atom = 0;
    for (int v = 0; v < 3; ++v) atom |= static_cast<long>(t.values(r, v)) << v;
    freq[atom] += 1.0 / static_cast<double>(t.rows());
  }
  CHECK((freq - ref).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("linear gaussian means follow the weighted recursion") {
  Dag dag(3);
  dag.add_edge(0, 1);
  dag.add_edge(1, 2);
  dag.add_edge(0, 2);
  LinearGaussianScm scm(dag, {{{0, 1}, 2.0}, {{1, 2}, -1.0}, {{0, 2}, 0.5}}, vec({1.0, 0.0, 0.0}),
                        vec({0.5, 0.5, 0.5}));
  Eigen::VectorXd mean = scm.exact_mean();
  CHECK(mean[0] == doctest::Approx(1.0));
  CHECK(mean[1] == doctest::Approx(2.0));
  CHECK(mean[2] == doctest::Approx(-2.0 + 0.5));

  LinearGaussianScm cut = scm.apply(Intervention::hard(1, 3.0));
  Eigen::VectorXd cmean = cut.exact_mean();
  CHECK(cmean[1] == doctest::Approx(3.0));
  CHECK(cmean[2] == doctest::Approx(-3.0 + 0.5));

  auto t = scm.sample(20000, 4);
  for (int v = 0; v < 3; ++v)
    CHECK(std::abs(t.values.col(v).mean() - mean[v]) < 0.05);

  LinearGaussianScm moved = scm.apply(Intervention::soft_linear(0, -2.0, 0.1));
  CHECK(moved.exact_mean()[0] == doctest::Approx(-2.0));
  CHECK(moved.noise_std(0) == doctest::Approx(0.1));
}

TEST_CASE("random soft shifts stay inside the family priors") {
  BinaryScm scm = fork_scm();
  Scm holder = scm;
  Rng rng(42);
  for (int t = 0; t < 50; ++t) {
    Intervention iv = random_soft_shift(holder, 1, rng);
    CHECK(iv.target == 1);
    const auto& sb = std::get<SoftBinaryChange>(iv.change);
    REQUIRE(sb.cpt.size() == 2);
    CHECK(sb.cpt.minCoeff() >= 0.1);
    CHECK(sb.cpt.maxCoeff() <= 0.9);
  }
}

TEST_CASE("auto plan shifts nodes at roughly the requested rate") {
  Scm scm = fork_scm();
  MechanismShiftPlan plan = auto_plan(scm, 200, 0.3, 99);
  REQUIRE(plan.contexts.size() == 200);
  long shifts = 0;
  for (const auto& pc : plan.contexts) {
    for (const auto& iv : pc.interventions) {
      CHECK_FALSE(iv.is_hard());
      ++shifts;
    }
  }
  const double rate = static_cast<double>(shifts) / (200.0 * 3.0);
  CHECK(rate > 0.15);
  CHECK(rate < 0.45);
}

TEST_CASE("suite generation records shift metadata the measures rely on") {
  Scm scm = fork_scm();
  MechanismShiftPlan plan;
  plan.contexts.push_back({0, {}});
  plan.contexts.push_back({1, {Intervention::hard(0, 1.0)}});
  plan.contexts.push_back({2, {Intervention::soft_binary(2, vec({0.8}))}});  // latent shift
  ContextSuite suite = generate_context_suite(scm, plan, 300, 7, true);

  REQUIRE(suite.metas.size() == 3);
  CHECK(suite.n_observed == 2);
  CHECK(suite.columns == std::vector<std::string>{"X0", "X1", "Z2"});
  CHECK(suite.meta(0).observational);
  CHECK(suite.meta(0).shifted.empty());

  CHECK_FALSE(suite.meta(1).observational);
  CHECK(suite.meta(1).shifted == std::vector<int>{0});
  REQUIRE(suite.meta(1).interventions.size() == 1);
  CHECK(suite.meta(1).interventions[0].kind == InterventionRecord::Kind::hard);
  CHECK(suite.meta(1).interventions[0].value == 1.0);
  CHECK((suite.table(1).values.col(0).array() == 1.0).all());

  // A latent intervention surfaces as a shift of every observed child.
  CHECK(suite.meta(2).shifted == std::vector<int>{0, 1});
  CHECK(suite.meta(2).interventions[0].kind == InterventionRecord::Kind::soft);
  CHECK(suite.observational_ids() == std::vector<int>{0});
}

TEST_CASE("random scm construction is deterministic and in range") {
  Dag dag = inject_latent_confounders(generate_er_dag(8, 0.3, 2), 2, 3, 6);
  Scm a = build_random_scm(dag, ScmFamily::binary, 31);
  Scm b = build_random_scm(dag, ScmFamily::binary, 31);
  const auto& ba = std::get<BinaryScm>(a);
  const auto& bb = std::get<BinaryScm>(b);
  for (int v = 0; v < dag.n_nodes(); ++v) {
    CHECK(ba.cpt(v) == bb.cpt(v));
    CHECK(ba.cpt(v).minCoeff() >= 0.1);
    CHECK(ba.cpt(v).maxCoeff() <= 0.9);
    CHECK(ba.cpt(v).size() == (1 << dag.parents(v).size()));
  }
}
