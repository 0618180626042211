#pragma once

#include <cmath>
#include <sstream>
#include <utility>

#include "hpdgeo/matrix.hpp"

namespace hpdgeo {

namespace detail {

inline CMat spectral_pow(const EigenDecomposition& d, double t) {
  return spectral_apply(d, [t](double x) { return std::pow(x, t); });
}

inline CMat spectral_log(const EigenDecomposition& d) {
  return spectral_apply(d, [](double x) { return std::log(x); });
}

inline CMat spectral_exp_checked(const EigenDecomposition& d, const char* what) {
  if (d.eigenvalues(0) > kExpOverflowCap) {
    std::ostringstream os;
    os << what << ": eigenvalue " << d.eigenvalues(0) << " exceeds " << kExpOverflowCap
       << "; exp would overflow";
    throw RangeError(os.str());
  }
  return spectral_apply(d, [](double x) { return std::exp(x); });
}

inline bool same_point(const CMat& a, const CMat& b) {
  return (a - b).norm() <= kHermTol * std::max(1.0, a.norm());
}

}  // namespace detail

/// A Hermitian direction attached to a base point of the HPD cone.
struct TangentVector {
  HpdMatrix base;
  HermitianMatrix direction;

  TangentVector(HpdMatrix base_point, HermitianMatrix dir)
      : base(std::move(base_point)), direction(std::move(dir)) {
    if (base.dim() != direction.dim()) {
      std::ostringstream os;
      os << "TangentVector: base is " << base.dim() << "x" << base.dim() << " but direction is "
         << direction.dim() << "x" << direction.dim();
      throw DimensionError(os.str());
    }
  }
};

/// Affine-invariant inner product tr(A^{-1} X A^{-1} Y) at the base point.
inline double metric(const HpdMatrix& base, const TangentVector& x, const TangentVector& y) {
  if (!detail::same_point(x.base.mat(), base.mat()) ||
      !detail::same_point(y.base.mat(), base.mat())) {
    throw DimensionError("metric: tangent vectors are not anchored at the given base point");
  }
  const CMat inv = detail::spectral_apply(base.eig(), [](double v) { return 1.0 / v; });
  return (inv * x.direction.mat() * inv * y.direction.mat()).trace().real();
}

inline double metric_norm(const TangentVector& x) {
  return std::sqrt(std::max(0.0, metric(x.base, x, x)));
}

/// Geodesic through two HPD points with the whitening transform precomputed,
/// cheap to evaluate at many parameter values.
class GeodesicSegment {
public:
  GeodesicSegment(HpdMatrix a, HpdMatrix b) : a_(std::move(a)), b_(std::move(b)) {
    check_same_dim(a_.mat(), b_.mat(), "GeodesicSegment");
    sqrt_a_ = detail::spectral_pow(a_.eig(), 0.5);
    inv_sqrt_a_ = detail::spectral_pow(a_.eig(), -0.5);
    inner_ = eig_hermitian(HermitianMatrix(symmetrized(inv_sqrt_a_ * b_.mat() * inv_sqrt_a_)));
  }

  const HpdMatrix& endpoint_a() const { return a_; }
  const HpdMatrix& endpoint_b() const { return b_; }

  HpdMatrix evaluate(double t) const {
    const CMat powered = detail::spectral_pow(inner_, t);
    return HpdMatrix(symmetrized(sqrt_a_ * powered * sqrt_a_));
  }

  /// Initial velocity A^{1/2} ln(A^{-1/2} B A^{-1/2}) A^{1/2} as a tangent vector at A.
  TangentVector initial_velocity() const {
    const CMat logged = detail::spectral_log(inner_);
    return TangentVector(a_, HermitianMatrix(symmetrized(sqrt_a_ * logged * sqrt_a_)));
  }

private:
  HpdMatrix a_;
  HpdMatrix b_;
  CMat sqrt_a_;
  CMat inv_sqrt_a_;
  EigenDecomposition inner_;
};

/// Point at parameter t on the geodesic from A (t=0) to B (t=1); any real t is allowed.
inline HpdMatrix geodesic(const HpdMatrix& a, const HpdMatrix& b, double t) {
  return GeodesicSegment(a, b).evaluate(t);
}

/// Geodesic midpoint of A and B.
inline HpdMatrix midpoint(const HpdMatrix& a, const HpdMatrix& b) { return geodesic(a, b, 0.5); }

/// Geodesic distance from the eigenvalues of A^{-1}B, avoiding any matrix square root.
inline double distance(const HpdMatrix& a, const HpdMatrix& b) {
  check_same_dim(a.mat(), b.mat(), "distance");
  Eigen::GeneralizedSelfAdjointEigenSolver<CMat> solver(b.mat(), a.mat(),
                                                        Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) {
    throw EigenSolverError("distance: generalized eigensolver failed to converge");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const double lg = std::log(solver.eigenvalues()(i));
    sum += lg * lg;
  }
  return std::sqrt(sum);
}

/// Same distance through ||ln(A^{-1/2} B A^{-1/2})||_F; the square-root form the
/// fast path is cross-checked against.
inline double distance_sqrt_form(const HpdMatrix& a, const HpdMatrix& b) {
  check_same_dim(a.mat(), b.mat(), "distance_sqrt_form");
  const CMat inv_sqrt_a = detail::spectral_pow(a.eig(), -0.5);
  const HermitianMatrix whitened(symmetrized(inv_sqrt_a * b.mat() * inv_sqrt_a));
  const EigenDecomposition d = eig_hermitian(whitened);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < d.eigenvalues.size(); ++i) {
    const double lg = std::log(d.eigenvalues(i));
    sum += lg * lg;
  }
  return std::sqrt(sum);
}

/// Tangent vector at A whose geodesic reaches B at t=1.
inline TangentVector log_map(const HpdMatrix& a, const HpdMatrix& b) {
  check_same_dim(a.mat(), b.mat(), "log_map");
  return GeodesicSegment(a, b).initial_velocity();
}

/// Point reached by following the Hermitian direction x from A for unit time.
inline HpdMatrix exp_map(const HpdMatrix& a, const HermitianMatrix& x) {
  check_same_dim(a.mat(), x.mat(), "exp_map");
  const CMat sqrt_a = detail::spectral_pow(a.eig(), 0.5);
  const CMat inv_sqrt_a = detail::spectral_pow(a.eig(), -0.5);
  const HermitianMatrix inner(symmetrized(inv_sqrt_a * x.mat() * inv_sqrt_a));
  const CMat exped = detail::spectral_exp_checked(eig_hermitian(inner), "exp_map");
  return HpdMatrix(symmetrized(sqrt_a * exped * sqrt_a));
}

inline HpdMatrix exp_map(const HpdMatrix& a, const TangentVector& x) {
  if (!detail::same_point(x.base.mat(), a.mat())) {
    throw DimensionError("exp_map: tangent vector is not anchored at the given base point");
  }
  return exp_map(a, x.direction);
}

}  // namespace hpdgeo
