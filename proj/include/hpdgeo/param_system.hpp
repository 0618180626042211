#pragma once

#include <Eigen/Cholesky>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "hpdgeo/geometry.hpp"
#include "hpdgeo/matrix.hpp"

namespace hpdgeo {

/// Chart u in R^m -> A(u) on the HPD cone, with partial derivatives and an
/// optional coordinate-recovery inverse.
class ParamSystem {
public:
  using DomainFn = std::function<bool(const RVec&)>;
  using OutputFn = std::function<CMat(const RVec&)>;
  using PartialsFn = std::function<std::vector<CMat>(const RVec&)>;
  using InverseFn = std::function<RVec(const CMat&)>;

  ParamSystem(int m, Eigen::Index n, DomainFn domain, OutputFn output, PartialsFn partials,
              InverseFn inverse = nullptr)
      : m_(m),
        n_(n),
        domain_(std::move(domain)),
        output_(std::move(output)),
        partials_(std::move(partials)),
        inverse_(std::move(inverse)) {
    if (m_ < 1) throw InputError("ParamSystem: parameter count must be >= 1");
    if (n_ < 1) throw InputError("ParamSystem: output dimension must be >= 1");
  }

  int param_count() const { return m_; }
  Eigen::Index dim() const { return n_; }
  bool has_chart_inverse() const { return static_cast<bool>(inverse_); }

  bool in_domain(const RVec& u) const {
    check_param_size(u);
    return domain_(u);
  }

  /// A(u), validated HPD. Throws DomainError outside the domain predicate.
  HpdMatrix output_at(const RVec& u) const {
    require_in_domain(u);
    return HpdMatrix(output_(u));
  }

  /// Raw A(u) without the domain gate; used by finite differencing and chart probes.
  CMat output_raw(const RVec& u) const {
    check_param_size(u);
    return output_(u);
  }

  /// The m Hermitian partial derivatives dA/du^i at u.
  std::vector<CMat> partials_at(const RVec& u) const {
    require_in_domain(u);
    return partials_(u);
  }

  /// Coordinates recovered from a matrix. Throws UnsupportedConfigError when the
  /// system was built without an inverse.
  RVec chart_inverse(const CMat& a) const {
    if (!inverse_) {
      throw UnsupportedConfigError(
          "ParamSystem: system has no chart inverse; coordinates cannot be recovered");
    }
    return inverse_(a);
  }

  /// Linear pencil A(u) = C0 + sum_i u_i C_i with exact partials and a
  /// Frobenius least-squares chart inverse. Domain defaults to the HPD check.
  static ParamSystem linear(const CMat& c0, std::vector<CMat> basis,
                            DomainFn domain = nullptr) {
    if (basis.empty()) throw InputError("ParamSystem::linear: empty basis");
    const Eigen::Index n = basis.front().rows();
    for (const CMat& c : basis) {
      check_square_finite(c, "ParamSystem::linear basis");
      HermitianMatrix{c};
      check_same_dim(c, basis.front(), "ParamSystem::linear basis");
    }
    CMat offset = c0.size() == 0 ? CMat(CMat::Zero(n, n)) : c0;
    check_same_dim(offset, basis.front(), "ParamSystem::linear offset");
    HermitianMatrix{offset};

    const int m = static_cast<int>(basis.size());
    RMat gram(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        gram(i, j) = frobenius_inner(basis[i], basis[j]).real();
      }
    }
    Eigen::LLT<RMat> gram_llt(gram);
    if (gram_llt.info() != Eigen::Success) {
      throw InputError("ParamSystem::linear: basis matrices are linearly dependent");
    }

    auto output = [offset, basis](const RVec& u) {
      CMat a = offset;
      for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
        a += u(i) * basis[i];
      }
      return a;
    };
    auto partials = [basis](const RVec&) { return basis; };
    auto inverse = [offset, basis, gram_llt](const CMat& a) {
      RVec rhs(static_cast<int>(basis.size()));
      for (int i = 0; i < static_cast<int>(basis.size()); ++i) {
        rhs(i) = frobenius_inner(basis[i], a - offset).real();
      }
      return RVec(gram_llt.solve(rhs));
    };
    DomainFn dom = domain ? std::move(domain) : hpd_domain(output);
    return ParamSystem(m, n, std::move(dom), std::move(output), std::move(partials),
                       std::move(inverse));
  }

  /// System defined by its output map alone: partials fall back to central finite
  /// differences (h = 1e-6 * max(1, |u_i|), symmetrized) and no chart inverse exists.
  static ParamSystem from_output_map(int m, Eigen::Index n, OutputFn output,
                                     DomainFn domain = nullptr) {
    OutputFn out_copy = output;
    auto partials = [output](const RVec& u) {
      std::vector<CMat> result;
      result.reserve(u.size());
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(u(i)));
        RVec up = u, dn = u;
        up(i) += h;
        dn(i) -= h;
        result.push_back(symmetrized((output(up) - output(dn)) / (2.0 * h)));
      }
      return result;
    };
    DomainFn dom = domain ? std::move(domain) : hpd_domain(out_copy);
    return ParamSystem(m, n, std::move(dom), std::move(out_copy), std::move(partials), nullptr);
  }

private:
  static DomainFn hpd_domain(OutputFn output) {
    return [output](const RVec& u) {
      const CMat a = output(u);
      if (!a.allFinite()) return false;
      Eigen::SelfAdjointEigenSolver<CMat> solver(symmetrized(a), Eigen::EigenvaluesOnly);
      if (solver.info() != Eigen::Success) return false;
      const double lo = solver.eigenvalues().minCoeff();
      const double hi = solver.eigenvalues().maxCoeff();
      return lo > kPdTol * std::max(1.0, hi);
    };
  }

  void check_param_size(const RVec& u) const {
    if (u.size() != m_) {
      std::ostringstream os;
      os << "ParamSystem: expected " << m_ << " parameters, got " << u.size();
      throw DimensionError(os.str());
    }
  }

  void require_in_domain(const RVec& u) const {
    if (!in_domain(u)) {
      std::ostringstream os;
      os << "ParamSystem: input (";
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        os << (i ? ", " : "") << u(i);
      }
      os << ") is outside the system domain";
      throw DomainError(os.str());
    }
  }

  int m_;
  Eigen::Index n_;
  DomainFn domain_;
  OutputFn output_;
  PartialsFn partials_;
  InverseFn inverse_;
};

/// 2x2 system [[u1, i u3], [-i u3, u2]] with domain u1 > 0, u1 u2 - u3^2 > 0.
inline ParamSystem make_m1_system() {
  CMat e11 = CMat::Zero(2, 2), e22 = CMat::Zero(2, 2), q = CMat::Zero(2, 2);
  e11(0, 0) = 1.0;
  e22(1, 1) = 1.0;
  q(0, 1) = Complex(0.0, 1.0);
  q(1, 0) = Complex(0.0, -1.0);
  auto domain = [](const RVec& u) {
    return u(0) > 0.0 && u(0) * u(1) - u(2) * u(2) > 0.0;
  };
  return ParamSystem::linear(CMat(), {e11, e22, q}, domain);
}

/// Diagonal system diag(u1, u2) with domain u1 > 0, u2 > 0.
inline ParamSystem make_m2_system() {
  CMat e11 = CMat::Zero(2, 2), e22 = CMat::Zero(2, 2);
  e11(0, 0) = 1.0;
  e22(1, 1) = 1.0;
  auto domain = [](const RVec& u) { return u(0) > 0.0 && u(1) > 0.0; };
  return ParamSystem::linear(CMat(), {e11, e22}, domain);
}

}  // namespace hpdgeo
