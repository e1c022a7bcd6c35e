#include "gasg/grassmann.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace gasg {

namespace {

Eigen::MatrixXd thin_q(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

}  // namespace

double orthonormality_error(const Eigen::MatrixXd& basis) {
  const Index d = basis.cols();
  return (basis.transpose() * basis - Eigen::MatrixXd::Identity(d, d)).norm();
}

Subspace::Subspace(Eigen::MatrixXd basis) : basis_(std::move(basis)) {
  if (basis_.cols() < 1 || basis_.rows() < basis_.cols()) {
    throw Error(ErrorCode::invalid_shape,
                "basis must be n x d with 1 <= d <= n, got " + std::to_string(basis_.rows()) +
                    "x" + std::to_string(basis_.cols()));
  }
  const double err = gasg::orthonormality_error(basis_);
  if (!(err <= kOrthonormalityTolerance)) {
    throw Error(ErrorCode::invalid_shape,
                "basis columns are not orthonormal (||B^T B - I||_F = " + std::to_string(err) + ")");
  }
}

Subspace Subspace::from_span(const Eigen::MatrixXd& m) {
  if (m.cols() < 1 || m.rows() < m.cols()) {
    throw Error(ErrorCode::invalid_shape, "cannot span a subspace from a wide or empty matrix");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_check(m);
  rank_check.setThreshold(kRankTolerance);
  if (rank_check.rank() < m.cols()) {
    throw Error(ErrorCode::rank_deficient, "spanning matrix is rank deficient");
  }
  return Subspace(thin_q(m));
}

double Subspace::orthonormality_error() const { return gasg::orthonormality_error(basis_); }

void ObservedVector::check(Index ambient_dim) const {
  if (static_cast<Index>(indices.size()) != values.size()) {
    throw Error(ErrorCode::invalid_shape, "column " + std::to_string(column_id) +
                                              ": indices and values differ in length");
  }
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= ambient_dim) {
      throw Error(ErrorCode::index_out_of_range,
                  "column " + std::to_string(column_id) + ": row " + std::to_string(indices[i]));
    }
    if (i > 0 && indices[i] <= indices[i - 1]) {
      throw Error(ErrorCode::invalid_shape,
                  "column " + std::to_string(column_id) + ": indices not strictly increasing");
    }
  }
}

ObservedVector make_dense_column(Index column_id, const Eigen::VectorXd& x) {
  ObservedVector v;
  v.column_id = column_id;
  v.indices.resize(static_cast<std::size_t>(x.size()));
  for (Index i = 0; i < x.size(); ++i) v.indices[static_cast<std::size_t>(i)] = i;
  v.values = x;
  return v;
}

ObservedVector spherize(const ObservedVector& x) {
  if (x.indices.empty()) {
    throw Error(ErrorCode::zero_vector, "column " + std::to_string(x.column_id) + " has no entries");
  }
  const double norm = x.values.norm();
  if (!(norm >= kZeroVectorNorm)) {
    throw Error(ErrorCode::zero_vector, "column " + std::to_string(x.column_id));
  }
  ObservedVector out;
  out.column_id = x.column_id;
  out.indices = x.indices;
  out.values = x.values / norm;
  return out;
}

Eigen::MatrixXd restricted_basis(const Subspace& u, std::span<const Index> indices) {
  const Eigen::MatrixXd& b = u.basis();
  Eigen::MatrixXd out(static_cast<Index>(indices.size()), b.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const Index row = indices[i];
    if (row < 0 || row >= b.rows()) {
      throw Error(ErrorCode::index_out_of_range,
                  "row " + std::to_string(row) + " outside ambient dimension " +
                      std::to_string(b.rows()));
    }
    out.row(static_cast<Index>(i)) = b.row(row);
  }
  return out;
}

Projection project(const Subspace& u, const ObservedVector& x) {
  Projection fit;
  const Index d = u.rank();
  if (x.observed() < d) {
    fit.status = FitStatus::underdetermined;
    return fit;
  }
  const Eigen::MatrixXd restricted = restricted_basis(u, x.indices);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(restricted);
  const Eigen::MatrixXd r =
      qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues();
  if (!(sv(d - 1) > kRankTolerance)) {
    fit.status = FitStatus::rank_deficient;
    return fit;
  }
  fit.weights = qr.solve(x.values);
  fit.residual = x.values - restricted * fit.weights;
  fit.residual_norm = fit.residual.norm();
  return fit;
}

Eigen::VectorXd least_squares_weights(const Subspace& u, const ObservedVector& x) {
  Projection fit = project(u, x);
  switch (fit.status) {
    case FitStatus::underdetermined:
      throw Error(ErrorCode::underdetermined,
                  "column " + std::to_string(x.column_id) + " has " +
                      std::to_string(x.observed()) + " entries for rank " +
                      std::to_string(u.rank()));
    case FitStatus::rank_deficient:
      throw Error(ErrorCode::rank_deficient,
                  "restricted basis for column " + std::to_string(x.column_id) + " is singular");
    case FitStatus::ok:
      break;
  }
  return std::move(fit.weights);
}

RankOneGradient gradient_from_projection(Index ambient_dim, const ObservedVector& x,
                                         const Projection& fit) {
  RankOneGradient g;
  g.w = fit.weights;
  g.sigma = fit.weights.norm();
  g.residual_norm = fit.residual_norm;
  g.e = Eigen::VectorXd::Zero(ambient_dim);
  if (fit.residual_norm < kDegenerateResidual) {
    g.degenerate = true;
    return g;
  }
  for (std::size_t i = 0; i < x.indices.size(); ++i) {
    g.e(x.indices[i]) = fit.residual(static_cast<Index>(i)) / fit.residual_norm;
  }
  return g;
}

RankOneGradient residual_gradient(const Subspace& u, const ObservedVector& x,
                                  const Eigen::VectorXd& w) {
  if (w.size() != u.rank()) {
    throw Error(ErrorCode::shape_mismatch, "weight vector length differs from subspace rank");
  }
  Projection fit;
  fit.weights = w;
  fit.residual = x.values - restricted_basis(u, x.indices) * w;
  fit.residual_norm = fit.residual.norm();
  return gradient_from_projection(u.ambient_dim(), x, fit);
}

Subspace rotate_toward(const Subspace& u, const Eigen::VectorXd& e, const Eigen::VectorXd& w,
                       double angle) {
  const double wnorm = w.norm();
  if (angle == 0.0 || wnorm == 0.0) return u;
  const Eigen::VectorXd w_hat = w / wnorm;
  const Eigen::VectorXd direction =
      (std::cos(angle) - 1.0) * (u.basis() * w_hat) + std::sin(angle) * e;
  Eigen::MatrixXd next = u.basis() + direction * w_hat.transpose();
  if (orthonormality_error(next) > Subspace::kOrthonormalityTolerance) {
    next = thin_q(next);
  }
  return Subspace(std::move(next), Subspace::Unchecked{});
}

Subspace geodesic_step(const Subspace& u, const RankOneGradient& g, double eta) {
  if (g.degenerate) {
    throw Error(ErrorCode::degenerate_gradient, "zero residual, no descent direction");
  }
  if (g.e.size() != u.ambient_dim() || g.w.size() != u.rank()) {
    throw Error(ErrorCode::shape_mismatch, "gradient factors do not match the subspace");
  }
  return rotate_toward(u, g.e, g.w, eta * g.sigma);
}

Eigen::VectorXd principal_angles(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim() || a.rank() != b.rank()) {
    throw Error(ErrorCode::shape_mismatch, "principal angles need equal shapes");
  }
  // Cosines lose resolution below ~1e-8 rad, so pair them with the sines from
  // the component of B orthogonal to A and take atan2.
  const Eigen::MatrixXd overlap = a.basis().transpose() * b.basis();
  const Eigen::MatrixXd off = b.basis() - a.basis() * overlap;
  const Eigen::VectorXd cosines = Eigen::JacobiSVD<Eigen::MatrixXd>(overlap).singularValues();
  const Eigen::VectorXd sines = Eigen::JacobiSVD<Eigen::MatrixXd>(off).singularValues();
  const Index d = a.rank();
  Eigen::VectorXd angles(d);
  for (Index i = 0; i < d; ++i) {
    // cosines descending pair with sines ascending.
    const double c = std::clamp(cosines(i), 0.0, 1.0);
    const double s = std::clamp(sines(d - 1 - i), 0.0, 1.0);
    angles(i) = std::clamp(std::atan2(s, c), 0.0, std::numbers::pi / 2);
  }
  return angles;
}

double principal_angle(const Subspace& a, const Subspace& b) {
  return principal_angles(a, b).maxCoeff();
}

double column_loss(const Subspace& u, const ObservedVector& x) {
  const Projection fit = project(u, x);
  if (fit.status != FitStatus::ok) {
    throw Error(fit.status == FitStatus::underdetermined ? ErrorCode::underdetermined
                                                         : ErrorCode::rank_deficient,
                "column " + std::to_string(x.column_id));
  }
  return fit.residual_norm;
}

}  // namespace gasg
