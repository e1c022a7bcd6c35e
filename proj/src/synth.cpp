#include "gasg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace gasg {

namespace {

void check_fractions(double outlier_fraction, double observe_fraction) {
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
    throw Error(ErrorCode::invalid_spec, "outlier fraction must lie in [0, 1)");
  }
  if (!(observe_fraction > 0.0 && observe_fraction <= 1.0)) {
    throw Error(ErrorCode::invalid_spec, "observe fraction must lie in (0, 1]");
  }
}

Eigen::MatrixXd gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
  }
  return g;
}

Eigen::VectorXd gaussian(Index rows, Rng& rng) {
  return gaussian(rows, 1, rng).col(0);
}

ObservedVector masked_column(Index id, const Eigen::VectorXd& x, double fraction, Rng& rng) {
  ObservedVector v;
  v.column_id = id;
  v.indices = sample_mask(x.size(), fraction, rng);
  v.values.resize(static_cast<Index>(v.indices.size()));
  for (std::size_t i = 0; i < v.indices.size(); ++i) {
    v.values(static_cast<Index>(i)) = x(v.indices[i]);
  }
  return v;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n < 1 || m < 1 || d < 1 || d > std::min(n, m)) {
    throw Error(ErrorCode::invalid_spec, "need 1 <= d <= min(n, m)");
  }
  if (!(s_min > 0.0 && s_min <= s_max)) {
    throw Error(ErrorCode::invalid_spec, "need 0 < s_min <= s_max");
  }
  check_fractions(outlier_fraction, observe_fraction);
  if (!(outlier_sigma > 0.0) || !(inlier_noise_sigma >= 0.0)) {
    throw Error(ErrorCode::invalid_spec, "noise scales must be non-negative (outliers positive)");
  }
}

void UnionSpec::validate() const {
  if (k < 1 || d < 1 || d > n || inliers_per_subspace < 1) {
    throw Error(ErrorCode::invalid_spec, "need k >= 1, 1 <= d <= n and N_in >= 1");
  }
  check_fractions(outlier_fraction, observe_fraction);
  if (!(outlier_sigma > 0.0)) throw Error(ErrorCode::invalid_spec, "outlier sigma must be positive");
}

Index UnionSpec::outlier_count() const {
  const double inliers = static_cast<double>(k * inliers_per_subspace);
  return static_cast<Index>(std::llround(inliers * outlier_fraction / (1.0 - outlier_fraction)));
}

std::vector<bool> GroundTruth::outlier_mask() const {
  std::vector<bool> mask(labels.size());
  for (std::size_t j = 0; j < labels.size(); ++j) mask[j] = labels[j] == kOutlierLabel;
  return mask;
}

Index GroundTruth::outlier_count() const {
  return static_cast<Index>(std::count(labels.begin(), labels.end(), kOutlierLabel));
}

Eigen::VectorXd spaced_singular_values(Index d, double s_min, double s_max) {
  Eigen::VectorXd s(d);
  if (d == 1) {
    s(0) = s_max;
    return s;
  }
  for (Index i = 0; i < d; ++i) {
    s(i) = s_max - (s_max - s_min) * static_cast<double>(i) / static_cast<double>(d - 1);
  }
  return s;
}

std::vector<Index> sample_mask(Index n, double fraction, Rng& rng) {
  const auto keep = std::clamp<Index>(
      static_cast<Index>(std::ceil(fraction * static_cast<double>(n) - 1e-9)), 1, n);
  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index{0});
  if (keep < n) {
    // Partial Fisher-Yates: the first `keep` slots end up a uniform sample.
    for (Index i = 0; i < keep; ++i) {
      const Index j = std::uniform_int_distribution<Index>(i, n - 1)(rng);
      std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
    }
    rows.resize(static_cast<std::size_t>(keep));
    std::sort(rows.begin(), rows.end());
  }
  return rows;
}

SyntheticProblem gen_low_rank(const SyntheticSpec& spec) {
  spec.validate();
  const Index n = spec.n, m = spec.m, d = spec.d;

  Rng factor_rng = make_rng(spec.rng_seed, stream::synth_factor);
  const Subspace left = Subspace::from_span(gaussian(n, d, factor_rng));

  std::vector<Rng> column_rngs;
  column_rngs.reserve(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) {
    column_rngs.push_back(make_rng(spec.rng_seed, stream::synth_column, static_cast<std::uint64_t>(j)));
  }
  Eigen::MatrixXd right_raw(m, d);
  for (Index j = 0; j < m; ++j) {
    right_raw.row(j) = gaussian(d, column_rngs[static_cast<std::size_t>(j)]).transpose();
  }
  const Eigen::MatrixXd right = Subspace::from_span(right_raw).basis();
  const Eigen::VectorXd sigma = spaced_singular_values(d, spec.s_min, spec.s_max);

  SyntheticProblem problem;
  problem.truth.subspaces.push_back(left);
  problem.truth.labels.assign(static_cast<std::size_t>(m), 0);

  const auto outliers = static_cast<Index>(std::floor(spec.outlier_fraction * static_cast<double>(m)));
  Rng outlier_rng = make_rng(spec.rng_seed, stream::synth_outliers);
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), outlier_rng);
  for (Index i = 0; i < outliers; ++i) {
    problem.truth.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = kOutlierLabel;
  }

  problem.dense.resize(n, m);
  problem.data.ambient_dim = n;
  problem.data.columns.resize(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) {
    Rng& rng = column_rngs[static_cast<std::size_t>(j)];
    Eigen::VectorXd x;
    if (problem.truth.labels[static_cast<std::size_t>(j)] == kOutlierLabel) {
      x = spec.outlier_sigma * gaussian(n, rng);
    } else {
      x = left.basis() * sigma.cwiseProduct(right.row(j).transpose());
      if (spec.inlier_noise_sigma > 0.0) x += spec.inlier_noise_sigma * gaussian(n, rng);
    }
    problem.dense.col(j) = x;
    problem.data.columns[static_cast<std::size_t>(j)] = masked_column(j, x, spec.observe_fraction, rng);
  }
  return problem;
}

SyntheticProblem gen_union(const UnionSpec& spec) {
  spec.validate();
  const Index n = spec.n, d = spec.d;
  const Index inliers = spec.k * spec.inliers_per_subspace;
  const Index total = inliers + spec.outlier_count();

  SyntheticProblem problem;
  std::vector<Eigen::MatrixXd> factors;
  for (Index k = 0; k < spec.k; ++k) {
    Rng rng = make_rng(spec.rng_seed, stream::synth_factor, static_cast<std::uint64_t>(k));
    factors.push_back(gaussian(n, d, rng));
    problem.truth.subspaces.push_back(Subspace::from_span(factors.back()));
  }

  std::vector<int>& labels = problem.truth.labels;
  labels.assign(static_cast<std::size_t>(total), kOutlierLabel);
  for (Index j = 0; j < inliers; ++j) {
    labels[static_cast<std::size_t>(j)] = static_cast<int>(j / spec.inliers_per_subspace);
  }
  Rng order_rng = make_rng(spec.rng_seed, stream::synth_outliers);
  std::shuffle(labels.begin(), labels.end(), order_rng);

  problem.dense.resize(n, total);
  problem.data.ambient_dim = n;
  problem.data.columns.resize(static_cast<std::size_t>(total));
  for (Index j = 0; j < total; ++j) {
    Rng rng = make_rng(spec.rng_seed, stream::synth_column, static_cast<std::uint64_t>(j));
    const int label = labels[static_cast<std::size_t>(j)];
    Eigen::VectorXd x = label == kOutlierLabel
                            ? Eigen::VectorXd(spec.outlier_sigma * gaussian(n, rng))
                            : Eigen::VectorXd(factors[static_cast<std::size_t>(label)] * gaussian(d, rng));
    problem.dense.col(j) = x;
    problem.data.columns[static_cast<std::size_t>(j)] = masked_column(j, x, spec.observe_fraction, rng);
  }
  return problem;
}

}  // namespace gasg
