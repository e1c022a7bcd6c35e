#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gasg/grassmann.hpp"

namespace gasg {

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
/// O(K^3)). Returns assignment[row] = column.
std::vector<Index> min_cost_assignment(const Eigen::MatrixXd& cost);

struct AngleReport {
  std::vector<double> angles;   // angles[i]: truth i vs its matched recovered subspace
  std::vector<Index> matching;  // matching[i]: recovered index matched to truth i
  double worst = 0.0;
  double median = 0.0;
  double mean = 0.0;
};

/// Principal-angle matrix between the two sets, optimal one-to-one matching
/// minimising the total angle, and worst / median / mean of the matched
/// angles. Throws ShapeMismatch.
AngleReport match_and_angles(std::span<const Subspace> truth, std::span<const Subspace> recovered);

/// ||original - recovered||_F / ||original||_F. Throws ShapeMismatch or
/// ZeroDenominator.
double relative_residual(const Eigen::MatrixXd& original, const Eigen::MatrixXd& recovered);

/// U U^T X, the orthogonal projection of every column onto span(U).
Eigen::MatrixXd project_columns(const Subspace& u, const Eigen::MatrixXd& x);

/// Percentage of inliers (outlier_mask false) whose predicted label disagrees
/// with the truth under the best one-to-one relabelling. Throws ShapeMismatch
/// or EmptyInliers.
double segmentation_error(std::span<const int> truth, std::span<const int> predicted,
                          const std::vector<bool>& outlier_mask);

double median(std::vector<double> values);

}  // namespace gasg
