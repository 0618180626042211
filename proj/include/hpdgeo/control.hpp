#pragma once

#include <Eigen/Cholesky>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hpdgeo/geometry.hpp"
#include "hpdgeo/matrix.hpp"
#include "hpdgeo/param_system.hpp"

namespace hpdgeo {

inline constexpr double kDefaultEps = 1e-15;
inline constexpr int kDefaultMaxIter = 10000;
inline constexpr double kRiemannianControlEta = 0.5;
inline constexpr double kNaturalControlEta = 0.5;
/// Largest tolerated cost increase before the step-halving guard rejects a step.
inline constexpr double kAscentSlack = 1e-12;
/// How many times a rejected step is halved before the run gives up.
inline constexpr int kMaxHalvings = 20;
/// Fisher matrices with a larger condition number are treated as singular.
inline constexpr double kMetricConditionCap = 1e12;
/// Residual above which a chart round-trip counts as off the output submanifold.
inline constexpr double kOffManifoldTol = 1e-8;

enum class StopReason {
  tolerance_met,
  max_iterations,
  domain_exit,
  metric_singular,
  stalled,
};

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::tolerance_met: return "tolerance_met";
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::domain_exit: return "domain_exit";
    case StopReason::metric_singular: return "metric_singular";
    case StopReason::stalled: return "stalled";
  }
  return "unknown";
}

struct TrajectoryStep {
  int k = 0;
  std::optional<RVec> u;
  HpdMatrix point;
  double cost = 0.0;
  double grad_norm = 0.0;
};

/// Ordered record of iterates plus the reason the loop stopped.
struct Trajectory {
  std::vector<TrajectoryStep> steps;
  StopReason reason = StopReason::max_iterations;

  bool converged() const { return reason == StopReason::tolerance_met; }
  /// Number of updates actually applied (the last recorded k).
  int iterations() const { return steps.empty() ? 0 : steps.back().k; }
  const TrajectoryStep& final_step() const { return steps.back(); }
};

/// Steering problem: drive A(u) toward the target along the chosen descent scheme.
struct ControlProblem {
  ParamSystem system;
  HpdMatrix target;
  RVec u0;
  double eta;
  double eps = kDefaultEps;
  int max_iter = kDefaultMaxIter;

  ControlProblem(ParamSystem sys, HpdMatrix b, RVec start, double eta_)
      : system(std::move(sys)), target(std::move(b)), u0(std::move(start)), eta(eta_) {
    if (system.dim() != target.dim()) {
      std::ostringstream os;
      os << "ControlProblem: system output is " << system.dim() << "x" << system.dim()
         << " but target is " << target.dim() << "x" << target.dim();
      throw DimensionError(os.str());
    }
    if (!(eta > 0.0)) throw InputError("ControlProblem: eta must be positive");
    if (!(eps > 0.0)) throw InputError("ControlProblem: eps must be positive");
  }
};

/// Squared geodesic distance from A(u) to the target.
inline double cost_J(const ParamSystem& system, const RVec& u, const HpdMatrix& target) {
  const double d = distance(system.output_at(u), target);
  return d * d;
}

/// One step of length eta along the geodesic from A_k to the target; contracts the
/// remaining distance by exactly (1 - eta).
inline HpdMatrix riemannian_step(const HpdMatrix& a_k, const HpdMatrix& target, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    std::ostringstream os;
    os << "riemannian_step: eta must be in [0, 1], got " << eta;
    throw InputError(os.str());
  }
  return geodesic(a_k, target, eta);
}

namespace detail {

inline void require_well_conditioned(const RMat& g, const char* what) {
  Eigen::SelfAdjointEigenSolver<RMat> solver(g, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw EigenSolverError(std::string(what) + ": eigensolver failed on the Fisher matrix");
  }
  const double hi = solver.eigenvalues().maxCoeff();
  const double lo = solver.eigenvalues().minCoeff();
  if (!(lo > 0.0) || hi > kMetricConditionCap * lo) {
    std::ostringstream os;
    os << what << ": Fisher metric is singular or ill-conditioned (eigenvalue range [" << lo
       << ", " << hi << "])";
    throw MetricSingularError(os.str());
  }
}

}  // namespace detail

/// Pullback metric G_ij = tr(A^{-1} dA_i A^{-1} dA_j) at u. Throws when the
/// result is singular or ill-conditioned beyond kMetricConditionCap.
inline RMat fisher_metric(const ParamSystem& system, const RVec& u) {
  const HpdMatrix a = system.output_at(u);
  const std::vector<CMat> parts = system.partials_at(u);
  const CMat inv = detail::spectral_apply(a.eig(), [](double v) { return 1.0 / v; });
  const int m = system.param_count();
  std::vector<CMat> whitened(parts.size());
  for (int i = 0; i < m; ++i) {
    whitened[i] = inv * parts[i];
  }
  RMat g(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      const double value = (whitened[i] * whitened[j]).trace().real();
      g(i, j) = value;
      g(j, i) = value;
    }
  }
  detail::require_well_conditioned(g, "fisher_metric");
  return g;
}

namespace detail {

/// Hermitian operator M with dJ/du_i = 2 Re<M, dA_i> for J = d^2(A, B):
/// M = B^{-1/2} U diag(ln(lam)/lam) U^H B^{-1/2}, where U diag(lam) U^H = B^{-1/2} A B^{-1/2}.
inline CMat squared_distance_gradient_op(const HpdMatrix& a, const HpdMatrix& b) {
  const CMat inv_sqrt_b = spectral_pow(b.eig(), -0.5);
  const HermitianMatrix whitened(symmetrized(inv_sqrt_b * a.mat() * inv_sqrt_b));
  const EigenDecomposition d = eig_hermitian(whitened);
  const CMat core = spectral_apply(d, [](double x) { return std::log(x) / x; });
  return symmetrized(inv_sqrt_b * core * inv_sqrt_b);
}

}  // namespace detail

/// Euclidean gradient of cost_J with respect to u.
inline RVec natural_gradient_J(const ParamSystem& system, const RVec& u,
                               const HpdMatrix& target) {
  const HpdMatrix a = system.output_at(u);
  const std::vector<CMat> parts = system.partials_at(u);
  const CMat op = detail::squared_distance_gradient_op(a, target);
  RVec g(system.param_count());
  for (int i = 0; i < system.param_count(); ++i) {
    g(i) = 2.0 * (op * parts[i]).trace().real();
  }
  return g;
}

/// u_{k+1} = u_k - eta * G^{-1} grad J, solved through an SPD factorization.
inline RVec natural_step(const ParamSystem& system, const RVec& u, const HpdMatrix& target,
                         double eta) {
  const RVec g = natural_gradient_J(system, u, target);
  const RMat fisher = fisher_metric(system, u);
  Eigen::LLT<RMat> llt(fisher);
  if (llt.info() != Eigen::Success) {
    throw MetricSingularError("natural_step: Cholesky factorization of the Fisher matrix failed");
  }
  return u - eta * RVec(llt.solve(g));
}

/// Geodesic-walk controller. Requires a chart inverse (coordinates are reported per
/// step) and a target on the output submanifold.
inline Trajectory run_riemannian_control(const ControlProblem& problem) {
  const ParamSystem& system = problem.system;
  if (!(problem.eta <= 1.0)) {
    throw InputError("run_riemannian_control: eta must be in (0, 1]");
  }
  if (!system.has_chart_inverse()) {
    throw UnsupportedConfigError(
        "run_riemannian_control: system has no chart inverse, so per-step coordinates cannot "
        "be reported; use the natural-gradient controller");
  }
  const RVec u_target = system.chart_inverse(problem.target.mat());
  const double residual = (system.output_raw(u_target) - problem.target.mat()).norm();
  if (residual > kOffManifoldTol) {
    std::ostringstream os;
    os << "run_riemannian_control: target is off the output submanifold (chart round-trip "
          "residual "
       << residual << " > " << kOffManifoldTol << "); use the natural-gradient controller";
    throw OffManifoldError(os.str());
  }

  Trajectory traj;
  HpdMatrix a = system.output_at(problem.u0);
  for (int k = 0; k <= problem.max_iter; ++k) {
    const double d = distance(a, problem.target);
    traj.steps.push_back({k, RVec(system.chart_inverse(a.mat())), a, d * d, d});
    if (d < problem.eps) {
      traj.reason = StopReason::tolerance_met;
      return traj;
    }
    if (k == problem.max_iter) break;
    a = riemannian_step(a, problem.target, problem.eta);
  }
  traj.reason = StopReason::max_iterations;
  return traj;
}

/// Natural-gradient controller in chart coordinates; the target may lie off the
/// output submanifold (the run then converges to its geodesic projection).
inline Trajectory run_natural_control(const ControlProblem& problem) {
  const ParamSystem& system = problem.system;
  Trajectory traj;
  RVec u = problem.u0;
  if (!system.in_domain(u)) {
    std::ostringstream os;
    os << "run_natural_control: initial input is outside the system domain";
    throw DomainError(os.str());
  }

  for (int k = 0; k <= problem.max_iter; ++k) {
    const HpdMatrix a = system.output_at(u);
    const double d = distance(a, problem.target);
    const double cost = d * d;
    const RVec grad = natural_gradient_J(system, u, problem.target);
    const double grad_norm = grad.norm();
    traj.steps.push_back({k, u, a, cost, grad_norm});
    if (grad_norm < problem.eps) {
      traj.reason = StopReason::tolerance_met;
      return traj;
    }
    if (k == problem.max_iter) break;

    RMat fisher;
    try {
      fisher = fisher_metric(system, u);
    } catch (const MetricSingularError&) {
      traj.reason = StopReason::metric_singular;
      return traj;
    }
    Eigen::LLT<RMat> llt(fisher);
    if (llt.info() != Eigen::Success) {
      traj.reason = StopReason::metric_singular;
      return traj;
    }
    const RVec direction = llt.solve(grad);

    double step = problem.eta;
    bool accepted = false;
    bool saw_domain_exit = false;
    for (int halving = 0; halving <= kMaxHalvings; ++halving, step *= 0.5) {
      const RVec candidate = u - step * direction;
      if (!system.in_domain(candidate)) {
        saw_domain_exit = true;
        continue;
      }
      if (cost_J(system, candidate, problem.target) > cost + kAscentSlack) {
        continue;
      }
      u = candidate;
      accepted = true;
      break;
    }
    if (!accepted) {
      traj.reason = saw_domain_exit ? StopReason::domain_exit : StopReason::stalled;
      return traj;
    }
  }
  traj.reason = StopReason::max_iterations;
  return traj;
}

}  // namespace hpdgeo
