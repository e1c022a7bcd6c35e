#pragma once

// Data-parallel kernels behind K-subspace seeding, selection and assignment.
// Every kernel has a plain serial reference in gasg::kernels::serial and an
// OpenMP version in gasg::kernels::omp. Both evaluate each output element with
// the same scalar code, so their results are bitwise identical; the tests rely
// on that and the benchmark compares their speed.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gasg/grassmann.hpp"

namespace gasg::kernels {

/// Residual norm of column x against subspace u, or 1 (the norm of a
/// spherized column) when the fit is underdetermined or rank deficient.
double fit_residual(const Subspace& u, const ObservedVector& x);

/// Indices of the k columns of z nearest to column `seed` (Euclidean), seed
/// excluded, ordered by distance then index.
std::vector<Index> nearest_columns(const Eigen::MatrixXd& z, Index seed, Index k);

/// Rank-d subspace spanned by the top-d left singular vectors of the seed
/// column and its `neighbors` nearest columns.
Subspace local_fit(const Eigen::MatrixXd& z, Index seed, Index neighbors, Index d);

struct AssignmentPass {
  std::vector<int> labels;
  std::vector<double> residuals;
};

namespace serial {

/// residuals(c, j) = fit_residual(subspaces[c], columns[j]).
Eigen::MatrixXd residual_matrix(std::span<const Subspace> subspaces,
                                std::span<const ObservedVector> columns);

/// min_d2[j] = min(min_d2[j], ||z_j - z_seed||^2).
void update_min_sq_distance(const Eigen::MatrixXd& z, Index seed, std::span<double> min_d2);

std::vector<Subspace> local_fits(const Eigen::MatrixXd& z, std::span<const Index> seeds,
                                 Index neighbors, Index d);

/// totals[c] = sum_j min(current[j], residuals(c, j)); +inf for chosen rows.
Eigen::VectorXd facility_totals(const Eigen::MatrixXd& residuals,
                                std::span<const double> current,
                                const std::vector<bool>& chosen);

/// Nearest subspace (ties to the lowest index) for every column.
AssignmentPass assign_columns(std::span<const Subspace> subspaces,
                              std::span<const ObservedVector> columns);

}  // namespace serial

namespace omp {

Eigen::MatrixXd residual_matrix(std::span<const Subspace> subspaces,
                                std::span<const ObservedVector> columns);
void update_min_sq_distance(const Eigen::MatrixXd& z, Index seed, std::span<double> min_d2);
std::vector<Subspace> local_fits(const Eigen::MatrixXd& z, std::span<const Index> seeds,
                                 Index neighbors, Index d);
Eigen::VectorXd facility_totals(const Eigen::MatrixXd& residuals,
                                std::span<const double> current,
                                const std::vector<bool>& chosen);
AssignmentPass assign_columns(std::span<const Subspace> subspaces,
                              std::span<const ObservedVector> columns);

}  // namespace omp

/// Number of threads the OpenMP kernels will use (1 without OpenMP).
int max_threads();

}  // namespace gasg::kernels
