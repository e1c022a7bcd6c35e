#pragma once

// Robust K-subspaces recovery: seed Q candidate subspaces by probabilistic
// farthest insertion, greedily pick the K with the lowest summed L2,1
// residual, refine them with the adaptive stochastic update applied to the
// nearest subspace only, then assign every column.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gasg/recovery.hpp"

namespace gasg {

struct CandidateSet {
  std::vector<Subspace> candidates;
  std::vector<Index> seed_columns;
  Index neighborhood_size = 0;
};

struct ClusterModel {
  std::vector<Subspace> subspaces;
  std::vector<int> assignments;
  std::vector<double> residuals;
};

/// Spherized columns, zero-filled into a dense n x m matrix. Columns with no
/// usable entries stay zero.
Eigen::MatrixXd zero_filled(const Dataset& data);

/// Spherizes every column; zero columns are kept as-is (they fit nothing).
std::vector<ObservedVector> spherize_all(std::span<const ObservedVector> columns);

/// D^2 seeding on the zero-filled matrix followed by a rank-d SVD fit of each
/// seed with its `neighborhood_size` nearest columns. Throws TooFewColumns if
/// q exceeds the number of columns.
CandidateSet seed_candidates(const Eigen::MatrixXd& zero_filled_columns, Index q, Index d,
                             Index neighborhood_size, Rng& rng);

/// Sum over spherized columns of the restricted residual against s; columns
/// that cannot be fitted contribute 1.
double candidate_loss(const Subspace& s, std::span<const ObservedVector> columns);

/// Facility-location greedy on a Q x m residual matrix: returns K row
/// indices, each round adding the candidate with the smallest resulting
/// sum_j min residual (ties to the lowest index).
std::vector<Index> greedy_select_indices(const Eigen::MatrixXd& residuals, Index k);

std::vector<Subspace> greedy_select(const CandidateSet& candidates,
                                    std::span<const ObservedVector> columns, Index k);

struct Assignment {
  Index index = 0;
  Eigen::VectorXd weights;
  double residual = 0.0;
};

/// Nearest subspace by restricted least-squares residual, ties to the lowest
/// index. Throws Underdetermined if |Omega| is below the largest rank.
Assignment assign_vector(const ObservedVector& x, std::span<const Subspace> subspaces);

struct RefineConfig {
  long max_iterations = 0;
  StepRuleConfig step;
  std::uint64_t rng_seed = 1;
  Sampling sampling = Sampling::uniform;
  /// When set, each trace record carries the angle between the updated
  /// subspace and the closest of these.
  std::vector<Subspace> truths;
};

struct RefineResult {
  std::vector<Subspace> subspaces;
  std::vector<RunTrace> traces;  // one per subspace
};

/// Assign-then-update sweeps over randomly drawn columns. Each subspace owns
/// its own step controller; only the winner of a draw is updated. Draws that
/// no subspace can fit are logged as skipped in every trace. With a single
/// subspace this reproduces gasg::run for the same seed and initial basis.
RefineResult refine(std::vector<Subspace> subspaces, const Dataset& data,
                    const RefineConfig& config);

struct ClusterConfig {
  Index k = 1;
  Index rank = 1;
  Index q = 1;
  Index neighborhood_size = 0;  // 0 means rank + 3
  long max_iterations = 0;
  StepRuleConfig step;
  std::uint64_t rng_seed = 1;
  Sampling sampling = Sampling::uniform;
  std::vector<Subspace> truths;   // optional, for traced angles
  std::vector<Subspace> initial;  // optional, skips seeding and selection

  void validate(const Dataset& data) const;
};

struct ClusterTimings {
  double seeding_seconds = 0.0;
  double selection_seconds = 0.0;
  double refine_seconds = 0.0;
};

struct ClusterResult {
  ClusterModel model;
  std::vector<RunTrace> traces;
  std::vector<Index> selected_candidates;
  ClusterTimings timings;
};

ClusterResult cluster(const Dataset& data, const ClusterConfig& config);

}  // namespace gasg
