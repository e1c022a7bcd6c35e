#include "gasg/metrics.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <string>

namespace gasg {

std::vector<Index> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const Index n = cost.rows();
  if (cost.cols() != n) throw Error(ErrorCode::shape_mismatch, "assignment needs a square cost matrix");
  if (n == 0) return {};
  // Shortest augmenting path formulation with row/column potentials, 1-based
  // internally so that slot 0 is the virtual start column.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<Index> p(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<bool> used(static_cast<std::size_t>(n + 1), false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const Index i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        const auto js = static_cast<std::size_t>(j);
        if (used[js]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[js];
        if (cur < minv[js]) {
          minv[js] = cur;
          way[js] = j0;
        }
        if (minv[js] < delta) {
          delta = minv[js];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        const auto js = static_cast<std::size_t>(j);
        if (used[js]) {
          u[static_cast<std::size_t>(p[js])] += delta;
          v[js] -= delta;
        } else {
          minv[js] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> assignment(static_cast<std::size_t>(n), 0);
  for (Index j = 1; j <= n; ++j) assignment[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return assignment;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

AngleReport match_and_angles(std::span<const Subspace> truth, std::span<const Subspace> recovered) {
  if (truth.size() != recovered.size() || truth.empty()) {
    throw Error(ErrorCode::shape_mismatch, "need the same positive number of true and recovered subspaces");
  }
  const auto k = static_cast<Index>(truth.size());
  Eigen::MatrixXd angles(k, k);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) {
      angles(i, j) = principal_angle(truth[static_cast<std::size_t>(i)], recovered[static_cast<std::size_t>(j)]);
    }
  }
  AngleReport report;
  report.matching = min_cost_assignment(angles);
  for (Index i = 0; i < k; ++i) report.angles.push_back(angles(i, report.matching[static_cast<std::size_t>(i)]));
  report.worst = *std::max_element(report.angles.begin(), report.angles.end());
  report.median = median(report.angles);
  report.mean = std::accumulate(report.angles.begin(), report.angles.end(), 0.0) / static_cast<double>(k);
  return report;
}

double relative_residual(const Eigen::MatrixXd& original, const Eigen::MatrixXd& recovered) {
  if (original.rows() != recovered.rows() || original.cols() != recovered.cols()) {
    throw Error(ErrorCode::shape_mismatch, "relative residual needs equal shapes");
  }
  const double denom = original.norm();
  if (!(denom > 0.0)) throw Error(ErrorCode::zero_denominator, "original matrix is zero");
  return (original - recovered).norm() / denom;
}

Eigen::MatrixXd project_columns(const Subspace& u, const Eigen::MatrixXd& x) {
  if (x.rows() != u.ambient_dim()) throw Error(ErrorCode::shape_mismatch, "row count differs from n");
  return u.basis() * (u.basis().transpose() * x);
}

double segmentation_error(std::span<const int> truth, std::span<const int> predicted,
                          const std::vector<bool>& outlier_mask) {
  if (truth.size() != predicted.size() || truth.size() != outlier_mask.size()) {
    throw Error(ErrorCode::shape_mismatch, "label vectors differ in length");
  }
  std::map<int, Index> true_ids, pred_ids;
  std::vector<std::pair<Index, Index>> pairs;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    if (outlier_mask[j]) continue;
    const Index t = true_ids.try_emplace(truth[j], static_cast<Index>(true_ids.size())).first->second;
    const Index p = pred_ids.try_emplace(predicted[j], static_cast<Index>(pred_ids.size())).first->second;
    pairs.emplace_back(t, p);
  }
  if (pairs.empty()) throw Error(ErrorCode::empty_inliers, "no inlier columns to score");

  const auto size = static_cast<Index>(std::max(true_ids.size(), pred_ids.size()));
  Eigen::MatrixXd agreement = Eigen::MatrixXd::Zero(size, size);
  for (const auto& [t, p] : pairs) agreement(t, p) += 1.0;
  const std::vector<Index> match = min_cost_assignment(-agreement);
  double correct = 0.0;
  for (Index t = 0; t < size; ++t) correct += agreement(t, match[static_cast<std::size_t>(t)]);
  const auto inliers = static_cast<double>(pairs.size());
  return 100.0 * (inliers - correct) / inliers;
}

}  // namespace gasg
