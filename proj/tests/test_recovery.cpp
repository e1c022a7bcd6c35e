#include <doctest.h>

#include <cmath>
#include <set>

#include "gasg/metrics.hpp"
#include "gasg/recovery.hpp"
#include "gasg/synth.hpp"
#include "support.hpp"

using namespace gasg;
using namespace gasg::test;

namespace {

SyntheticProblem problem(Index n, Index m, Index d, double outliers, double observe, double s_min,
                         double s_max, std::uint64_t seed) {
  SyntheticSpec s;
  s.n = n;
  s.m = m;
  s.d = d;
  s.s_min = s_min;
  s.s_max = s_max;
  s.outlier_fraction = outliers;
  s.observe_fraction = observe;
  s.rng_seed = seed;
  return gen_low_rank(s);
}

RecoveryConfig config(Index d, long iterations, std::uint64_t seed) {
  RecoveryConfig c;
  c.rank = d;
  c.max_iterations = iterations;
  c.rng_seed = seed;
  return c;
}

}  // namespace

TEST_SUITE("recovery") {

TEST_CASE("init_subspace") {
  Rng a(1);
  const Subspace square = init_subspace(6, 6, a);
  CHECK(square.orthonormality_error() <= 1e-12);

  Rng b(7), c(7), d(8);
  const Subspace s1 = init_subspace(50, 5, b);
  CHECK(s1.basis() == init_subspace(50, 5, c).basis());
  const Subspace s2 = init_subspace(50, 5, d);
  CHECK(principal_angle(s1, s2) > 0.0);
  CHECK(s1.orthonormality_error() <= 1e-12);
  CHECK(s2.orthonormality_error() <= 1e-12);

  CHECK_THROWS_AS(init_subspace(3, 4, a), Error);
}

TEST_CASE("process_vector") {
  StepRuleConfig constant;
  constant.rule = StepRule::constant;

  SUBCASE("a column inside the subspace is skipped") {
    Subspace u = random_subspace(6, 2, 3);
    const Eigen::MatrixXd before = u.basis();
    StepController steps(constant);
    const TraceRecord rec = process_vector(u, make_dense_column(4, u.basis() * Eigen::Vector2d(2, -1)), steps, 0);
    CHECK(rec.skipped);
    CHECK(rec.residual_norm <= 1e-12);
    CHECK(rec.column_id == 4);
    CHECK(u.basis() == before);
  }

  SUBCASE("2D closed form: the step aligns U with x") {
    const double alpha = 0.8;
    const Eigen::Vector2d dir(std::cos(alpha), std::sin(alpha));
    constant.constant_eta = alpha / std::cos(alpha);  // eta * sigma = alpha
    StepController steps(constant);
    Subspace u(Eigen::Vector2d(1, 0));
    const TraceRecord rec = process_vector(u, make_dense_column(0, 3.0 * dir), steps, 0);
    CHECK_FALSE(rec.skipped);
    CHECK(principal_angle(u, Subspace(Eigen::MatrixXd(dir))) <= 1e-10);
  }

  SUBCASE("underdetermined and zero columns are skipped") {
    Subspace u = random_subspace(6, 3, 4);
    StepController steps(constant);
    CHECK(process_vector(u, observed(Eigen::VectorXd::Ones(6), {0, 1}), steps, 0).skipped);
    CHECK(std::isnan(process_vector(u, make_dense_column(0, Eigen::VectorXd::Zero(6)), steps, 1).residual_norm));
  }

  SUBCASE("valid steps keep the basis orthonormal") {
    Subspace u = random_subspace(30, 4, 5);
    StepRuleConfig adaptive;
    StepController steps(adaptive);
    Rng rng(6);
    for (long it = 0; it < 500; ++it) {
      process_vector(u, observed(gaussian_vector(30, rng), {0, 3, 4, 7, 9, 10, 15, 21, 22, 28}), steps, it);
      CHECK(u.orthonormality_error() <= 1e-10);
    }
  }
}

TEST_CASE("step controller rules") {
  RankOneGradient g;
  g.e = Eigen::Vector3d(0, 0, 1);
  g.w = Eigen::Vector2d(3, 4);
  g.sigma = 5.0;
  g.residual_norm = 0.5;

  StepRuleConfig c;
  c.rule = StepRule::diminishing;
  c.diminishing_scale = 2.0;
  StepController dim(c);
  CHECK(dim.step_angle(g, 9) == doctest::Approx(2.0 / 10 * 5.0));
  CHECK(dim.mu() == 9.0);

  c.rule = StepRule::constant;
  c.constant_eta = 0.1;
  CHECK(StepController(c).step_angle(g, 0) == doctest::Approx(0.5));

  c.rule = StepRule::grouse;
  CHECK(StepController(c).step_angle(g, 0) == doctest::Approx(0.1 * 0.5 * 5.0));

  c.rule = StepRule::adaptive;
  StepController ad(c);
  CHECK(ad.step_angle(g, 0) == doctest::Approx(5.0));
  CHECK(ad.level() == 0);
  CHECK(ad.mu() == 7.5);

  for (StepRule r : {StepRule::adaptive, StepRule::diminishing, StepRule::constant, StepRule::grouse}) {
    CHECK(parse_step_rule(to_string(r)) == r);
  }
  CHECK_THROWS_AS(parse_step_rule("newton"), Error);
}

TEST_CASE("ColumnSampler") {
  ColumnSampler cyclic(7, Sampling::cyclic_shuffled, 3);
  for (int pass = 0; pass < 3; ++pass) {
    std::set<Index> seen;
    for (int i = 0; i < 7; ++i) seen.insert(cyclic.next());
    CHECK(seen.size() == 7);
  }
  ColumnSampler a(10, Sampling::uniform, 5), b(10, Sampling::uniform, 5);
  for (int i = 0; i < 100; ++i) {
    const Index j = a.next();
    CHECK(j == b.next());
    CHECK(j >= 0);
    CHECK(j < 10);
  }
  CHECK_THROWS_AS(ColumnSampler(0, Sampling::uniform, 1), Error);
}

TEST_CASE("run recovers a clean well-conditioned subspace") {
  const SyntheticProblem p = problem(200, 400, 5, 0.0, 1.0, 1.0, 1.0, 21);
  RecoveryConfig c = config(5, 10 * 400, 3);
  c.trace_angles = false;
  const RecoveryResult r = run(p.data, c);
  CHECK(principal_angle(r.subspace, p.truth.subspaces.front()) <= 1e-6);
  CHECK(r.trace.records.size() == 4000);
}

TEST_CASE("adaptive beats diminishing at 65% outliers and 70% observation") {
  const SyntheticProblem p = problem(500, 500, 10, 0.65, 0.7, 9000, 10000, 2);
  RecoveryConfig c = config(10, 10 * 500, 2);
  c.trace_angles = false;
  const double adaptive = principal_angle(run(p.data, c).subspace, p.truth.subspaces.front());
  c.step.rule = StepRule::diminishing;
  const double dim = principal_angle(run(p.data, c).subspace, p.truth.subspaces.front());
  CHECK(adaptive <= 1e-3);
  CHECK(dim >= 10 * adaptive);
}

TEST_CASE("median angle after 10 passes stays small up to 50% outliers") {
  for (double rho : {0.0, 0.3, 0.5}) {
    std::vector<double> angles;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const SyntheticProblem p = problem(200, 200, 5, rho, 0.7, 2000, 10000, seed);
      RecoveryConfig c = config(5, 10 * 200, seed);
      c.trace_angles = false;
      angles.push_back(principal_angle(run(p.data, c).subspace, p.truth.subspaces.front()));
    }
    CAPTURE(rho);
    CHECK(median(angles) <= 1e-3);
  }
}

TEST_CASE("run edge cases") {
  const SyntheticProblem p = problem(20, 30, 2, 0.2, 0.8, 1, 2, 4);

  SUBCASE("zero iterations returns the initial subspace") {
    RecoveryConfig c = config(2, 0, 9);
    const RecoveryResult r = run(p.data, c);
    Rng rng = make_rng(9, stream::init);
    CHECK(r.subspace.basis() == init_subspace(20, 2, rng).basis());
    CHECK(r.trace.records.empty());
    c.initial = random_subspace(20, 2, 77);
    CHECK(run(p.data, c).subspace.basis() == c.initial->basis());
  }

  SUBCASE("deterministic traces and bases") {
    RecoveryConfig c = config(2, 300, 5);
    c.truth = p.truth.subspaces.front();
    const RecoveryResult a = run(p.data, c);
    const RecoveryResult b = run(p.data, c);
    CHECK(a.trace == b.trace);
    CHECK(a.subspace.basis() == b.subspace.basis());
    c.rng_seed = 6;
    CHECK_FALSE(run(p.data, c).trace == a.trace);
  }

  SUBCASE("angle tolerance stops early") {
    RecoveryConfig c = config(2, 100000, 5);
    c.truth = p.truth.subspaces.front();
    c.angle_tolerance = 1e-3;
    const RecoveryResult r = run(p.data, c);
    REQUIRE_FALSE(r.trace.records.empty());
    CHECK(r.trace.records.size() < 100000);
    CHECK(*r.trace.records.back().angle <= 1e-3);
    CHECK(principal_angle(r.subspace, *c.truth) <= 1e-3);
  }

  SUBCASE("no usable column") {
    Dataset bad;
    bad.ambient_dim = 5;
    bad.columns.push_back(observed(Eigen::VectorXd::Ones(5), {0}));
    bad.columns.push_back(make_dense_column(1, Eigen::VectorXd::Zero(5)));
    try {
      run(bad, config(2, 10, 1));
      FAIL("expected AllColumnsUnusable");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::all_columns_unusable);
    }
  }

  SUBCASE("invalid configuration") {
    CHECK_THROWS_AS(run(p.data, config(21, 10, 1)), Error);
    RecoveryConfig c = config(2, -1, 1);
    CHECK_THROWS_AS(run(p.data, c), Error);
    c = config(2, 10, 1);
    c.truth = random_subspace(20, 3, 1);
    CHECK_THROWS_AS(run(p.data, c), Error);
  }
}

}  // TEST_SUITE
