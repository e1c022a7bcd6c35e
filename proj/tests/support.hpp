#pragma once

// Small builders shared by the unit tests.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "gasg/grassmann.hpp"
#include "gasg/rng.hpp"

namespace gasg::test {

inline constexpr double kPi = std::numbers::pi;

inline Eigen::MatrixXd gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = n01(rng);
  }
  return m;
}

inline Eigen::VectorXd gaussian_vector(Index n, Rng& rng) { return gaussian(n, 1, rng).col(0); }

inline Subspace random_subspace(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  return Subspace::from_span(gaussian(n, d, rng));
}

inline ObservedVector observed(const Eigen::VectorXd& full, const std::vector<Index>& rows,
                               Index id = 0) {
  ObservedVector x;
  x.column_id = id;
  x.indices = rows;
  x.values.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) x.values(static_cast<Index>(i)) = full(rows[i]);
  return x;
}

inline ObservedVector values(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double a : v) x(i++) = a;
  return make_dense_column(0, x);
}

/// Orthonormal basis of span(e_i : i in rows) in R^n.
inline Subspace coordinate_subspace(Index n, std::initializer_list<Index> rows) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, static_cast<Index>(rows.size()));
  Index c = 0;
  for (Index r : rows) b(r, c++) = 1.0;
  return Subspace(b);
}

}  // namespace gasg::test
