#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <memory>
#include <sstream>
#include <utility>

#include "hpdgeo/errors.hpp"

namespace hpdgeo {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

/// Relative tolerance for accepting a matrix as Hermitian.
inline constexpr double kHermTol = 1e-12;
/// Relative floor below which an eigenvalue no longer counts as strictly positive.
inline constexpr double kPdTol = 1e-12;
/// Relative bar for eigendecomposition reconstruction residuals.
inline constexpr double kReconstructTol = 1e-10;
/// Largest eigenvalue herm_exp accepts before exp() would overflow.
inline constexpr double kExpOverflowCap = 700.0;

inline void check_square_finite(const CMat& a, const char* what) {
  if (a.rows() < 1 || a.rows() != a.cols()) {
    std::ostringstream os;
    os << what << ": matrix must be square with n >= 1, got " << a.rows() << "x" << a.cols();
    throw DimensionError(os.str());
  }
  if (!a.allFinite()) {
    throw InputError(std::string(what) + ": matrix has non-finite entries");
  }
}

inline void check_same_dim(const CMat& a, const CMat& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << what << ": dimension mismatch, " << a.rows() << "x" << a.cols() << " vs " << b.rows()
       << "x" << b.cols();
    throw DimensionError(os.str());
  }
}

/// tr(A^H B). Conjugate-symmetric in its arguments.
inline Complex frobenius_inner(const CMat& a, const CMat& b) {
  check_same_dim(a, b, "frobenius_inner");
  return (a.adjoint() * b).trace();
}

inline double frobenius_norm(const CMat& a) { return a.norm(); }

inline CMat symmetrized(const CMat& a) { return 0.5 * (a + a.adjoint()); }

/// Complex square matrix constrained to A = A^H within kHermTol; stores (A + A^H)/2.
class HermitianMatrix {
public:
  explicit HermitianMatrix(CMat a) {
    check_square_finite(a, "HermitianMatrix");
    const double drift = (a - a.adjoint()).norm();
    const double scale = std::max(1.0, a.norm());
    if (drift > kHermTol * scale) {
      std::ostringstream os;
      os << "HermitianMatrix: ||A - A^H|| = " << drift << " exceeds " << kHermTol * scale
         << " (tolerance " << kHermTol << " relative)";
      throw HermiticityError(os.str());
    }
    mat_ = symmetrized(a);
  }

  Eigen::Index dim() const { return mat_.rows(); }
  const CMat& mat() const { return mat_; }

private:
  CMat mat_;
};

/// Real eigenvalues in descending order with a unitary eigenvector matrix.
struct EigenDecomposition {
  RVec eigenvalues;
  CMat eigenvectors;
};

/// Full Hermitian eigendecomposition, eigenvalues sorted descending.
inline EigenDecomposition eig_hermitian(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMat> solver(a.mat());
  if (solver.info() != Eigen::Success) {
    throw EigenSolverError("eig_hermitian: eigensolver failed to converge");
  }
  EigenDecomposition d;
  d.eigenvalues = solver.eigenvalues().reverse();
  d.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return d;
}

/// Hermitian matrix with strictly positive spectrum; eigendecomposed once at construction.
class HpdMatrix {
public:
  explicit HpdMatrix(HermitianMatrix h) : herm_(std::move(h)) {
    auto eig = std::make_shared<EigenDecomposition>(eig_hermitian(herm_));
    const double lambda_max = eig->eigenvalues(0);
    const double lambda_min = eig->eigenvalues(eig->eigenvalues.size() - 1);
    if (!(lambda_min > kPdTol * std::max(1.0, lambda_max))) {
      std::ostringstream os;
      os << "HpdMatrix: eigenvalue " << lambda_min << " is not strictly positive (floor "
         << kPdTol * std::max(1.0, lambda_max) << ")";
      throw PositivityError(os.str());
    }
    eig_ = std::move(eig);
  }

  explicit HpdMatrix(const CMat& a) : HpdMatrix(HermitianMatrix(a)) {}

  Eigen::Index dim() const { return herm_.dim(); }
  const CMat& mat() const { return herm_.mat(); }
  const HermitianMatrix& hermitian() const { return herm_; }
  const EigenDecomposition& eig() const { return *eig_; }

  static HpdMatrix identity(Eigen::Index n) { return HpdMatrix(CMat(CMat::Identity(n, n))); }

private:
  HermitianMatrix herm_;
  std::shared_ptr<const EigenDecomposition> eig_;
};

namespace detail {

template <typename F>
CMat spectral_apply(const EigenDecomposition& d, F&& f) {
  RVec mapped(d.eigenvalues.size());
  for (Eigen::Index i = 0; i < d.eigenvalues.size(); ++i) {
    mapped(i) = f(d.eigenvalues(i));
  }
  CMat out = d.eigenvectors * mapped.asDiagonal() * d.eigenvectors.adjoint();
  return symmetrized(out);
}

inline void require_positive_spectrum(const HpdMatrix& a, const char* what) {
  const double lambda_min = a.eig().eigenvalues(a.dim() - 1);
  if (!(lambda_min > 0.0)) {
    std::ostringstream os;
    os << what << ": eigenvalue " << lambda_min << " is outside the domain (must be > 0)";
    throw DomainError(os.str());
  }
}

}  // namespace detail

/// Matrix logarithm of an HPD matrix; the result is Hermitian but generally indefinite.
inline HermitianMatrix hpd_log(const HpdMatrix& a) {
  detail::require_positive_spectrum(a, "hpd_log");
  return HermitianMatrix(detail::spectral_apply(a.eig(), [](double x) { return std::log(x); }));
}

inline HpdMatrix hpd_sqrt(const HpdMatrix& a) {
  detail::require_positive_spectrum(a, "hpd_sqrt");
  return HpdMatrix(detail::spectral_apply(a.eig(), [](double x) { return std::sqrt(x); }));
}

inline HpdMatrix hpd_inv_sqrt(const HpdMatrix& a) {
  detail::require_positive_spectrum(a, "hpd_inv_sqrt");
  return HpdMatrix(
      detail::spectral_apply(a.eig(), [](double x) { return 1.0 / std::sqrt(x); }));
}

inline HpdMatrix hpd_inv(const HpdMatrix& a) {
  detail::require_positive_spectrum(a, "hpd_inv");
  return HpdMatrix(detail::spectral_apply(a.eig(), [](double x) { return 1.0 / x; }));
}

/// Real matrix power A^t through the spectrum.
inline HpdMatrix hpd_pow(const HpdMatrix& a, double t) {
  detail::require_positive_spectrum(a, "hpd_pow");
  return HpdMatrix(detail::spectral_apply(a.eig(), [t](double x) { return std::pow(x, t); }));
}

/// exp of a Hermitian matrix; lands on the HPD cone.
inline HpdMatrix herm_exp(const HermitianMatrix& x) {
  EigenDecomposition d = eig_hermitian(x);
  const double lambda_max = d.eigenvalues(0);
  if (lambda_max > kExpOverflowCap) {
    std::ostringstream os;
    os << "herm_exp: eigenvalue " << lambda_max << " exceeds " << kExpOverflowCap
       << "; exp would overflow";
    throw RangeError(os.str());
  }
  return HpdMatrix(detail::spectral_apply(d, [](double x) { return std::exp(x); }));
}

}  // namespace hpdgeo
