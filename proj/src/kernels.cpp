#include "gasg/kernels.hpp"

#include <algorithm>
#include <limits>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gasg::kernels {

double fit_residual(const Subspace& u, const ObservedVector& x) {
  const Projection fit = project(u, x);
  return fit.status == FitStatus::ok ? fit.residual_norm : 1.0;
}

std::vector<Index> nearest_columns(const Eigen::MatrixXd& z, Index seed, Index k) {
  std::vector<std::pair<double, Index>> dist;
  dist.reserve(static_cast<std::size_t>(z.cols()));
  for (Index j = 0; j < z.cols(); ++j) {
    if (j != seed) dist.emplace_back((z.col(j) - z.col(seed)).squaredNorm(), j);
  }
  const auto take = static_cast<std::size_t>(std::clamp<Index>(k, 0, z.cols() - 1));
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
  std::vector<Index> out(take);
  for (std::size_t i = 0; i < take; ++i) out[i] = dist[i].second;
  return out;
}

Subspace local_fit(const Eigen::MatrixXd& z, Index seed, Index neighbors, Index d) {
  const std::vector<Index> near = nearest_columns(z, seed, neighbors);
  Eigen::MatrixXd patch(z.rows(), static_cast<Index>(near.size()) + 1);
  patch.col(0) = z.col(seed);
  for (std::size_t i = 0; i < near.size(); ++i) patch.col(static_cast<Index>(i) + 1) = z.col(near[i]);
  if (patch.cols() >= d) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(patch, Eigen::ComputeThinU);
    return Subspace(svd.matrixU().leftCols(d));
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(patch, Eigen::ComputeFullU);
  return Subspace(svd.matrixU().leftCols(d));
}

namespace {

double sq_distance(const Eigen::MatrixXd& z, Index a, Index b) {
  return (z.col(a) - z.col(b)).squaredNorm();
}

double facility_total(const Eigen::MatrixXd& residuals, Index c, std::span<const double> current) {
  double total = 0.0;
  for (Index j = 0; j < residuals.cols(); ++j) {
    total += std::min(current[static_cast<std::size_t>(j)], residuals(c, j));
  }
  return total;
}

void assign_one(std::span<const Subspace> subspaces, const ObservedVector& x, int& label,
                double& residual) {
  label = 0;
  residual = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < subspaces.size(); ++i) {
    const double r = fit_residual(subspaces[i], x);
    if (r < residual) {
      residual = r;
      label = static_cast<int>(i);
    }
  }
}

void check_min_d2(const Eigen::MatrixXd& z, std::span<double> min_d2) {
  if (static_cast<Index>(min_d2.size()) != z.cols()) {
    throw Error(ErrorCode::shape_mismatch, "distance buffer length differs from column count");
  }
}

}  // namespace

namespace serial {

Eigen::MatrixXd residual_matrix(std::span<const Subspace> subspaces,
                                std::span<const ObservedVector> columns) {
  const auto q = static_cast<Index>(subspaces.size());
  const auto m = static_cast<Index>(columns.size());
  Eigen::MatrixXd out(q, m);
  for (Index c = 0; c < q; ++c) {
    for (Index j = 0; j < m; ++j) {
      out(c, j) = fit_residual(subspaces[static_cast<std::size_t>(c)], columns[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

void update_min_sq_distance(const Eigen::MatrixXd& z, Index seed, std::span<double> min_d2) {
  check_min_d2(z, min_d2);
  for (Index j = 0; j < z.cols(); ++j) {
    min_d2[static_cast<std::size_t>(j)] = std::min(min_d2[static_cast<std::size_t>(j)], sq_distance(z, j, seed));
  }
}

std::vector<Subspace> local_fits(const Eigen::MatrixXd& z, std::span<const Index> seeds,
                                 Index neighbors, Index d) {
  std::vector<Subspace> out;
  out.reserve(seeds.size());
  for (Index s : seeds) out.push_back(local_fit(z, s, neighbors, d));
  return out;
}

Eigen::VectorXd facility_totals(const Eigen::MatrixXd& residuals, std::span<const double> current,
                                const std::vector<bool>& chosen) {
  Eigen::VectorXd totals(residuals.rows());
  for (Index c = 0; c < residuals.rows(); ++c) {
    totals(c) = chosen[static_cast<std::size_t>(c)] ? std::numeric_limits<double>::infinity()
                                                    : facility_total(residuals, c, current);
  }
  return totals;
}

AssignmentPass assign_columns(std::span<const Subspace> subspaces,
                              std::span<const ObservedVector> columns) {
  AssignmentPass pass;
  pass.labels.resize(columns.size());
  pass.residuals.resize(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    assign_one(subspaces, columns[j], pass.labels[j], pass.residuals[j]);
  }
  return pass;
}

}  // namespace serial

namespace omp {

Eigen::MatrixXd residual_matrix(std::span<const Subspace> subspaces,
                                std::span<const ObservedVector> columns) {
  const auto q = static_cast<Index>(subspaces.size());
  const auto m = static_cast<Index>(columns.size());
  Eigen::MatrixXd out(q, m);
#pragma omp parallel for collapse(2) schedule(static)
  for (Index c = 0; c < q; ++c) {
    for (Index j = 0; j < m; ++j) {
      out(c, j) = fit_residual(subspaces[static_cast<std::size_t>(c)], columns[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

void update_min_sq_distance(const Eigen::MatrixXd& z, Index seed, std::span<double> min_d2) {
  check_min_d2(z, min_d2);
  const Index m = z.cols();
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < m; ++j) {
    min_d2[static_cast<std::size_t>(j)] = std::min(min_d2[static_cast<std::size_t>(j)], sq_distance(z, j, seed));
  }
}

std::vector<Subspace> local_fits(const Eigen::MatrixXd& z, std::span<const Index> seeds,
                                 Index neighbors, Index d) {
  std::vector<Subspace> out(seeds.size());
  const auto q = static_cast<Index>(seeds.size());
#pragma omp parallel for schedule(dynamic)
  for (Index i = 0; i < q; ++i) {
    out[static_cast<std::size_t>(i)] = local_fit(z, seeds[static_cast<std::size_t>(i)], neighbors, d);
  }
  return out;
}

Eigen::VectorXd facility_totals(const Eigen::MatrixXd& residuals, std::span<const double> current,
                                const std::vector<bool>& chosen) {
  const Index q = residuals.rows();
  Eigen::VectorXd totals(q);
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < q; ++c) {
    totals(c) = chosen[static_cast<std::size_t>(c)] ? std::numeric_limits<double>::infinity()
                                                    : facility_total(residuals, c, current);
  }
  return totals;
}

AssignmentPass assign_columns(std::span<const Subspace> subspaces,
                              std::span<const ObservedVector> columns) {
  AssignmentPass pass;
  pass.labels.resize(columns.size());
  pass.residuals.resize(columns.size());
  const auto m = static_cast<Index>(columns.size());
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < m; ++j) {
    const auto k = static_cast<std::size_t>(j);
    assign_one(subspaces, columns[k], pass.labels[k], pass.residuals[k]);
  }
  return pass;
}

}  // namespace omp

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace gasg::kernels
