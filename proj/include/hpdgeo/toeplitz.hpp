#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "hpdgeo/matrix.hpp"
#include "hpdgeo/param_system.hpp"

namespace hpdgeo {

/// Residual bar for accepting a matrix as Toeplitz.
inline constexpr double kToeplitzTol = 1e-10;

/// Chart theta -> R(theta) over Hermitian Toeplitz matrices: entry (j,k) = r_{j-k}
/// with r_{-k} = conj(r_k), packed as theta = (r0, Re r1, Im r1, ..., Re r_{n-1}, Im r_{n-1}).
class ToeplitzChart {
public:
  explicit ToeplitzChart(Eigen::Index n) : n_(n) {
    if (n < 1) throw InputError("ToeplitzChart: dimension must be >= 1");
    basis_.push_back(CMat::Identity(n, n));
    for (Eigen::Index k = 1; k < n; ++k) {
      CMat re = CMat::Zero(n, n), im = CMat::Zero(n, n);
      for (Eigen::Index j = k; j < n; ++j) {
        re(j, j - k) = 1.0;
        re(j - k, j) = 1.0;
        im(j, j - k) = Complex(0.0, 1.0);
        im(j - k, j) = Complex(0.0, -1.0);
      }
      basis_.push_back(re);
      basis_.push_back(im);
    }
  }

  Eigen::Index dim() const { return n_; }
  int param_count() const { return static_cast<int>(2 * n_ - 1); }
  /// The constant Hermitian Toeplitz partials dR/dtheta_j.
  const std::vector<CMat>& basis() const { return basis_; }

  CMat matrix_of(const RVec& theta) const {
    check_theta(theta);
    CMat r = theta(0) * basis_[0];
    for (int j = 1; j < param_count(); ++j) {
      r += theta(j) * basis_[j];
    }
    return r;
  }

  /// Coordinates read off by averaging each diagonal of the candidate matrix.
  RVec theta_of(const CMat& a) const {
    check_square_finite(a, "ToeplitzChart::theta_of");
    if (a.rows() != n_) {
      std::ostringstream os;
      os << "ToeplitzChart::theta_of: expected " << n_ << "x" << n_ << ", got " << a.rows()
         << "x" << a.cols();
      throw DimensionError(os.str());
    }
    RVec theta(param_count());
    double diag_sum = 0.0;
    for (Eigen::Index j = 0; j < n_; ++j) diag_sum += a(j, j).real();
    theta(0) = diag_sum / static_cast<double>(n_);
    for (Eigen::Index k = 1; k < n_; ++k) {
      Complex r_k(0.0, 0.0);
      for (Eigen::Index j = k; j < n_; ++j) {
        r_k += a(j, j - k) + std::conj(a(j - k, j));
      }
      r_k /= static_cast<double>(2 * (n_ - k));
      theta(2 * k - 1) = r_k.real();
      theta(2 * k) = r_k.imag();
    }
    return theta;
  }

  /// Frobenius distance from the candidate to its nearest chart point.
  double structure_residual(const CMat& a) const { return (a - matrix_of(theta_of(a))).norm(); }

  bool is_toeplitz(const CMat& a) const {
    return structure_residual(a) <= kToeplitzTol * std::max(1.0, a.norm());
  }

  /// The chart as a linear system (HPD domain, exact partials, exact inverse).
  ParamSystem to_param_system() const { return ParamSystem::linear(CMat(), basis_); }

private:
  void check_theta(const RVec& theta) const {
    if (theta.size() != param_count()) {
      std::ostringstream os;
      os << "ToeplitzChart: expected " << param_count() << " coordinates, got " << theta.size();
      throw DimensionError(os.str());
    }
  }

  Eigen::Index n_;
  std::vector<CMat> basis_;
};

}  // namespace hpdgeo
