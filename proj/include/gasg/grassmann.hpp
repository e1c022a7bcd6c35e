#pragma once

// Points on the Grassmannian G(d, n) and the per-vector geometry used by the
// stochastic L2,1 solver: spherization, restricted least squares, the rank-one
// gradient of the column loss, the closed-form geodesic step and principal
// angles.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gasg/errors.hpp"

namespace gasg {

using Index = Eigen::Index;

/// An n x d matrix with orthonormal columns. The class only hands out const
/// access to the basis so every instance satisfies the orthonormality
/// invariant checked at construction.
class Subspace {
 public:
  /// Tolerance on ||B^T B - I||_F accepted at construction and maintained
  /// after every geodesic step.
  static constexpr double kOrthonormalityTolerance = 1e-10;

  Subspace() = default;

  /// Wraps an already orthonormal basis. Throws InvalidShape if the columns
  /// are not orthonormal within kOrthonormalityTolerance or d > n.
  explicit Subspace(Eigen::MatrixXd basis);

  /// Orthonormal basis of span(m) via a thin Householder QR. Requires m to
  /// have full column rank.
  static Subspace from_span(const Eigen::MatrixXd& m);

  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  Index ambient_dim() const noexcept { return basis_.rows(); }
  Index rank() const noexcept { return basis_.cols(); }

  double orthonormality_error() const;

 private:
  struct Unchecked {};
  Subspace(Eigen::MatrixXd basis, Unchecked) : basis_(std::move(basis)) {}

  friend Subspace rotate_toward(const Subspace&, const Eigen::VectorXd&,
                                const Eigen::VectorXd&, double);

  Eigen::MatrixXd basis_;
};

double orthonormality_error(const Eigen::MatrixXd& basis);

/// One data column restricted to its observed rows.
struct ObservedVector {
  Index column_id = 0;
  std::vector<Index> indices;  // strictly increasing
  Eigen::VectorXd values;      // values[i] sits at row indices[i]

  /// Throws InvalidShape / IndexOutOfRange if the invariants do not hold for
  /// ambient dimension n.
  void check(Index ambient_dim) const;

  Index observed() const noexcept { return static_cast<Index>(indices.size()); }
};

/// Fully observed column with the given id.
ObservedVector make_dense_column(Index column_id, const Eigen::VectorXd& x);

/// The Euclidean gradient of the column loss is -e w^T; it is stored in
/// factored form so it costs O(n + d) memory.
struct RankOneGradient {
  Eigen::VectorXd e;            // unit residual direction, zero off the mask
  Eigen::VectorXd w;            // least-squares weights
  double sigma = 0.0;           // ||w||, the only nonzero singular value
  double residual_norm = 0.0;   // ||r|| before normalisation
  bool degenerate = false;      // residual below kDegenerateResidual

  Eigen::MatrixXd dense() const { return -e * w.transpose(); }
};

inline constexpr double kZeroVectorNorm = 1e-14;
inline constexpr double kDegenerateResidual = 1e-12;
inline constexpr double kRankTolerance = 1e-10;

/// values / ||values||; throws ZeroVector below kZeroVectorNorm.
ObservedVector spherize(const ObservedVector& x);

/// Rows `indices` of U. Throws IndexOutOfRange.
Eigen::MatrixXd restricted_basis(const Subspace& u, std::span<const Index> indices);

enum class FitStatus { ok, underdetermined, rank_deficient };

/// Result of fitting one observed vector against one subspace. The residual
/// lives on the observed rows only.
struct Projection {
  FitStatus status = FitStatus::ok;
  Eigen::VectorXd weights;
  Eigen::VectorXd residual;
  double residual_norm = 0.0;
};

/// Non-throwing least-squares fit of x_Omega by U_Omega w, solved through a
/// Householder QR of U_Omega. The rank test uses the singular values of the
/// d x d triangular factor. IndexOutOfRange is still thrown for bad indices.
Projection project(const Subspace& u, const ObservedVector& x);

/// argmin_w ||x_Omega - U_Omega w||. Throws Underdetermined or RankDeficient.
Eigen::VectorXd least_squares_weights(const Subspace& u, const ObservedVector& x);

/// Zero-padded normalized residual and weights for a least-squares solution.
RankOneGradient residual_gradient(const Subspace& u, const ObservedVector& x,
                                  const Eigen::VectorXd& w);

/// Same as residual_gradient but reuses the residual from an existing fit.
RankOneGradient gradient_from_projection(Index ambient_dim, const ObservedVector& x,
                                         const Projection& fit);

/// U + ((cos t - 1) U w_hat + sin t e) w_hat^T with w_hat = w / ||w||. The
/// result is re-orthonormalized if drift exceeds the tolerance. Requires
/// e orthogonal to span(U) and ||e|| = 1.
Subspace rotate_toward(const Subspace& u, const Eigen::VectorXd& e,
                       const Eigen::VectorXd& w, double angle);

/// Step of length eta along -grad: rotate_toward with angle eta * sigma.
/// Throws DegenerateGradient.
Subspace geodesic_step(const Subspace& u, const RankOneGradient& g, double eta);

/// Largest principal angle between two equal-rank subspaces, in [0, pi/2].
/// Throws ShapeMismatch.
double principal_angle(const Subspace& a, const Subspace& b);

/// All principal angles, ascending.
Eigen::VectorXd principal_angles(const Subspace& a, const Subspace& b);

/// The column loss min_w ||x_Omega - U_Omega w||; the observed values are used
/// as given (no spherization).
double column_loss(const Subspace& u, const ObservedVector& x);

}  // namespace gasg
