#pragma once

// Synthetic robust-recovery problems with known ground truth: conditioned
// low-rank matrices with column outliers, and unions of subspaces.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gasg/recovery.hpp"

namespace gasg {

inline constexpr int kOutlierLabel = -1;

struct SyntheticSpec {
  Index n = 0;
  Index m = 0;
  Index d = 1;
  double s_min = 1.0;
  double s_max = 1.0;
  double outlier_fraction = 0.0;
  double observe_fraction = 1.0;
  double outlier_sigma = 1.0;
  double inlier_noise_sigma = 0.0;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

struct UnionSpec {
  Index k = 1;
  Index d = 1;
  Index n = 0;
  Index inliers_per_subspace = 0;
  double outlier_fraction = 0.0;
  double observe_fraction = 1.0;
  double outlier_sigma = 1.0;
  std::uint64_t rng_seed = 1;

  void validate() const;
  /// Number of outlier columns so that they make up outlier_fraction of all
  /// columns: round(k * N_in * rho / (1 - rho)).
  Index outlier_count() const;
};

struct GroundTruth {
  std::vector<Subspace> subspaces;
  std::vector<int> labels;  // subspace index, or kOutlierLabel

  std::vector<bool> outlier_mask() const;
  Index outlier_count() const;
};

struct SyntheticProblem {
  Dataset data;           // observed entries only
  Eigen::MatrixXd dense;  // the full matrix before masking
  GroundTruth truth;
};

/// X = L Sigma R^T with orthonormalised Gaussian L (n x d) and R (m x d) and
/// Sigma evenly spaced over [s_min, s_max], so cond(X) = s_max / s_min
/// exactly. floor(rho m) distinct columns become N(0, sigma^2) outliers and
/// every column keeps ceil(f n) rows sampled without replacement.
SyntheticProblem gen_low_rank(const SyntheticSpec& spec);

/// K independent blocks Y_L Y_R^T (n x d and N_in x d Gaussian factors),
/// outliers shuffled in at random positions, masks as above.
SyntheticProblem gen_union(const UnionSpec& spec);

/// Evenly spaced singular values used by gen_low_rank.
Eigen::VectorXd spaced_singular_values(Index d, double s_min, double s_max);

/// Rows kept for one column: ceil(fraction * n) sorted distinct indices.
std::vector<Index> sample_mask(Index n, double fraction, Rng& rng);

}  // namespace gasg
