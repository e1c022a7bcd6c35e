#include <doctest.h>

#include "gasg/kernels.hpp"
#include "gasg/ksubspaces.hpp"
#include "gasg/synth.hpp"
#include "support.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace gasg;
using namespace gasg::test;

namespace {

struct Fixture {
  SyntheticProblem problem;
  std::vector<ObservedVector> unit;
  Eigen::MatrixXd z;
  std::vector<Subspace> candidates;

  Fixture() {
    UnionSpec s;
    s.k = 4;
    s.d = 3;
    s.n = 40;
    s.inliers_per_subspace = 30;
    s.outlier_fraction = 0.4;
    s.observe_fraction = 0.7;
    s.rng_seed = 8;
    problem = gen_union(s);
    unit = spherize_all(problem.data.columns);
    z = zero_filled(problem.data);
    for (std::uint64_t i = 0; i < 12; ++i) candidates.push_back(random_subspace(40, 3, 100 + i));
  }
};

bool same_bases(const std::vector<Subspace>& a, const std::vector<Subspace>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].basis() != b[i].basis()) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("serial and OpenMP kernels agree bitwise") {
#ifdef _OPENMP
  // Oversubscribe so the parallel path really splits work even on one core.
  const int saved = omp_get_max_threads();
  omp_set_num_threads(4);
#endif
  const Fixture f;

  CHECK(kernels::serial::residual_matrix(f.candidates, f.unit) ==
        kernels::omp::residual_matrix(f.candidates, f.unit));

  std::vector<double> a(static_cast<std::size_t>(f.z.cols()), std::numeric_limits<double>::infinity());
  std::vector<double> b = a;
  for (Index seed : {3, 17, 90}) {
    kernels::serial::update_min_sq_distance(f.z, seed, a);
    kernels::omp::update_min_sq_distance(f.z, seed, b);
  }
  CHECK(a == b);

  const std::vector<Index> seeds{0, 5, 33, 101};
  CHECK(same_bases(kernels::serial::local_fits(f.z, seeds, 6, 3), kernels::omp::local_fits(f.z, seeds, 6, 3)));

  const Eigen::MatrixXd r = kernels::serial::residual_matrix(f.candidates, f.unit);
  std::vector<double> current(static_cast<std::size_t>(r.cols()), 0.9);
  std::vector<bool> chosen(static_cast<std::size_t>(r.rows()), false);
  chosen[2] = true;
  CHECK(kernels::serial::facility_totals(r, current, chosen) == kernels::omp::facility_totals(r, current, chosen));

  const auto pa = kernels::serial::assign_columns(f.candidates, f.unit);
  const auto pb = kernels::omp::assign_columns(f.candidates, f.unit);
  CHECK(pa.labels == pb.labels);
  CHECK(pa.residuals == pb.residuals);
#ifdef _OPENMP
  omp_set_num_threads(saved);
#endif
}

TEST_CASE("kernel semantics") {
  const Fixture f;
  const Eigen::MatrixXd r = kernels::omp::residual_matrix(f.candidates, f.unit);
  for (Index c = 0; c < r.rows(); c += 5) {
    for (Index j = 0; j < r.cols(); j += 7) {
      CHECK(r(c, j) == kernels::fit_residual(f.candidates[static_cast<std::size_t>(c)],
                                             f.unit[static_cast<std::size_t>(j)]));
    }
  }

  std::vector<double> current(static_cast<std::size_t>(r.cols()), std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(static_cast<std::size_t>(r.rows()), false);
  chosen[1] = true;
  const Eigen::VectorXd totals = kernels::omp::facility_totals(r, current, chosen);
  CHECK(std::isinf(totals(1)));
  CHECK(totals(0) == doctest::Approx(r.row(0).sum()));

  const auto pass = kernels::omp::assign_columns(f.candidates, f.unit);
  for (std::size_t j = 0; j < f.unit.size(); ++j) {
    const Index best = [&] {
      Index arg = 0;
      for (Index c = 1; c < r.rows(); ++c) {
        if (r(c, static_cast<Index>(j)) < r(arg, static_cast<Index>(j))) arg = c;
      }
      return arg;
    }();
    CHECK(pass.labels[j] == best);
    CHECK(pass.residuals[j] == r(best, static_cast<Index>(j)));
  }
}

TEST_CASE("nearest_columns orders by distance then index") {
  Eigen::MatrixXd z(1, 6);
  z << 0.0, 2.0, 1.0, -1.0, 5.0, 1.0;
  const std::vector<Index> near = kernels::nearest_columns(z, 0, 3);
  CHECK(near == std::vector<Index>{2, 3, 5});
  CHECK(kernels::nearest_columns(z, 0, 10).size() == 5);
}

TEST_CASE("local_fit recovers an exact subspace") {
  const Subspace truth = random_subspace(15, 3, 4);
  Rng rng(5);
  const Eigen::MatrixXd z = truth.basis() * gaussian(3, 20, rng);
  CHECK(principal_angle(kernels::local_fit(z, 4, 6, 3), truth) <= 1e-8);
  // Fewer patch columns than d still yields a valid rank-d basis.
  CHECK(kernels::local_fit(z, 4, 1, 3).orthonormality_error() <= 1e-10);
}

TEST_CASE("mismatched distance buffer") {
  const Eigen::MatrixXd z = Eigen::MatrixXd::Ones(3, 4);
  std::vector<double> wrong(3);
  CHECK_THROWS_AS(kernels::serial::update_min_sq_distance(z, 0, wrong), Error);
  CHECK_THROWS_AS(kernels::omp::update_min_sq_distance(z, 0, wrong), Error);
}

}  // TEST_SUITE
