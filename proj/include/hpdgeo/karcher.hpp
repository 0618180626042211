#pragma once

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hpdgeo/control.hpp"
#include "hpdgeo/geometry.hpp"
#include "hpdgeo/matrix.hpp"
#include "hpdgeo/toeplitz.hpp"

namespace hpdgeo {

/// Default step for the manifold-side mean iteration: half the averaged
/// fixed-point step, so the run contracts linearly instead of jumping.
inline double riemannian_mean_default_eta(std::size_t n_inputs) {
  return 1.0 / (2.0 * static_cast<double>(n_inputs));
}

inline constexpr double kNaturalMeanEta = 0.5;

/// Mean of N HPD matrices under the geodesic distance.
struct MeanProblem {
  std::vector<HpdMatrix> inputs;
  double eta;
  double eps = kDefaultEps;
  int max_iter = kDefaultMaxIter;

  MeanProblem(std::vector<HpdMatrix> in, double eta_) : inputs(std::move(in)), eta(eta_) {
    if (inputs.empty()) throw InputError("MeanProblem: need at least one input matrix");
    for (const HpdMatrix& r : inputs) {
      check_same_dim(r.mat(), inputs.front().mat(), "MeanProblem");
    }
    if (!(eta > 0.0)) throw InputError("MeanProblem: eta must be positive");
  }
};

/// Average squared geodesic distance from R to the inputs.
inline double karcher_cost(const HpdMatrix& r, const std::vector<HpdMatrix>& inputs) {
  if (inputs.empty()) throw InputError("karcher_cost: empty input list");
  double sum = 0.0;
  for (const HpdMatrix& ri : inputs) {
    const double d = distance(ri, r);
    sum += d * d;
  }
  return sum / static_cast<double>(inputs.size());
}

inline HpdMatrix arithmetic_mean(const std::vector<HpdMatrix>& inputs) {
  if (inputs.empty()) throw InputError("arithmetic_mean: empty input list");
  CMat sum = CMat::Zero(inputs.front().dim(), inputs.front().dim());
  for (const HpdMatrix& ri : inputs) sum += ri.mat();
  return HpdMatrix(CMat(sum / static_cast<double>(inputs.size())));
}

namespace detail {

/// Per-iteration work for the manifold-side mean: eigendecompose each whitened
/// input once and reuse it for the cost, the gradient norm, and the step.
struct MeanIterate {
  CMat sqrt_r;
  CMat log_sum;        // sum_i ln(R^{-1/2} R_i R^{-1/2})
  double cost = 0.0;   // L(R)
  double grad_norm = 0.0;  // ||log_sum||_F, the metric norm of sum_i Log_R(R_i)
};

inline MeanIterate mean_iterate(const HpdMatrix& r, const std::vector<HpdMatrix>& inputs) {
  MeanIterate it;
  it.sqrt_r = spectral_pow(r.eig(), 0.5);
  const CMat inv_sqrt_r = spectral_pow(r.eig(), -0.5);
  it.log_sum = CMat::Zero(r.dim(), r.dim());
  double cost_sum = 0.0;
  for (const HpdMatrix& ri : inputs) {
    const HermitianMatrix whitened(symmetrized(inv_sqrt_r * ri.mat() * inv_sqrt_r));
    const EigenDecomposition d = eig_hermitian(whitened);
    for (Eigen::Index i = 0; i < d.eigenvalues.size(); ++i) {
      const double lg = std::log(d.eigenvalues(i));
      cost_sum += lg * lg;
    }
    it.log_sum += spectral_log(d);
  }
  it.log_sum = symmetrized(it.log_sum);
  it.cost = cost_sum / static_cast<double>(inputs.size());
  it.grad_norm = it.log_sum.norm();
  return it;
}

inline HpdMatrix mean_step_from(const MeanIterate& it, const EigenDecomposition& log_sum_eig,
                                double eta) {
  EigenDecomposition scaled = log_sum_eig;
  scaled.eigenvalues *= eta;
  const CMat exped = spectral_exp_checked(scaled, "riemannian_mean_step");
  return HpdMatrix(symmetrized(it.sqrt_r * exped * it.sqrt_r));
}

}  // namespace detail

/// R_{k+1} = R^{1/2} exp(eta * sum_i ln(R^{-1/2} R_i R^{-1/2})) R^{1/2}, i.e. one step
/// along eta times the summed log directions; fixed point exactly at the mean.
inline HpdMatrix riemannian_mean_step(const HpdMatrix& r_k, const std::vector<HpdMatrix>& inputs,
                                      double eta) {
  if (inputs.empty()) throw InputError("riemannian_mean_step: empty input list");
  if (!(eta > 0.0)) throw InputError("riemannian_mean_step: eta must be positive");
  const detail::MeanIterate it = detail::mean_iterate(r_k, inputs);
  return detail::mean_step_from(it, eig_hermitian(HermitianMatrix(it.log_sum)), eta);
}

/// Fixed-point mean iteration from the arithmetic mean; stops when the metric norm
/// of the summed log directions drops below eps.
inline Trajectory run_riemannian_mean(const MeanProblem& problem) {
  Trajectory traj;
  HpdMatrix r = arithmetic_mean(problem.inputs);
  for (int k = 0; k <= problem.max_iter; ++k) {
    const detail::MeanIterate it = detail::mean_iterate(r, problem.inputs);
    traj.steps.push_back({k, std::nullopt, r, it.cost, it.grad_norm});
    if (it.grad_norm < problem.eps) {
      traj.reason = StopReason::tolerance_met;
      return traj;
    }
    if (k == problem.max_iter) break;

    const EigenDecomposition log_sum_eig = eig_hermitian(HermitianMatrix(it.log_sum));
    double step = problem.eta;
    bool accepted = false;
    for (int halving = 0; halving <= kMaxHalvings; ++halving, step *= 0.5) {
      const HpdMatrix candidate = detail::mean_step_from(it, log_sum_eig, step);
      if (karcher_cost(candidate, problem.inputs) > it.cost + kAscentSlack) {
        continue;
      }
      r = candidate;
      accepted = true;
      break;
    }
    if (!accepted) {
      traj.reason = StopReason::stalled;
      return traj;
    }
  }
  traj.reason = StopReason::max_iterations;
  return traj;
}

/// Euclidean gradient of theta -> karcher_cost(R(theta), inputs).
inline RVec natural_mean_gradient(const ToeplitzChart& chart, const RVec& theta,
                                  const std::vector<HpdMatrix>& inputs) {
  if (inputs.empty()) throw InputError("natural_mean_gradient: empty input list");
  const HpdMatrix r(chart.matrix_of(theta));
  CMat op_sum = CMat::Zero(chart.dim(), chart.dim());
  for (const HpdMatrix& ri : inputs) {
    op_sum += detail::squared_distance_gradient_op(r, ri);
  }
  const double scale = 2.0 / static_cast<double>(inputs.size());
  RVec g(chart.param_count());
  for (int j = 0; j < chart.param_count(); ++j) {
    g(j) = scale * (op_sum * chart.basis()[j]).trace().real();
  }
  return g;
}

/// Natural-gradient mean in Toeplitz coordinates, started at the arithmetic mean.
/// Inputs must be Toeplitz within kToeplitzTol.
inline Trajectory run_natural_mean(const MeanProblem& problem) {
  const Eigen::Index n = problem.inputs.front().dim();
  const ToeplitzChart chart(n);
  for (std::size_t i = 0; i < problem.inputs.size(); ++i) {
    const CMat& a = problem.inputs[i].mat();
    if (!chart.is_toeplitz(a)) {
      std::ostringstream os;
      os << "run_natural_mean: input " << (i + 1) << " is not Toeplitz (structure residual "
         << chart.structure_residual(a) << ")";
      throw ToeplitzStructureError(os.str());
    }
  }
  const ParamSystem system = chart.to_param_system();
  RVec theta = chart.theta_of(arithmetic_mean(problem.inputs).mat());

  Trajectory traj;
  for (int k = 0; k <= problem.max_iter; ++k) {
    const HpdMatrix r = system.output_at(theta);
    const double cost = karcher_cost(r, problem.inputs);
    const RVec grad = natural_mean_gradient(chart, theta, problem.inputs);
    const double grad_norm = grad.norm();
    traj.steps.push_back({k, theta, r, cost, grad_norm});
    if (grad_norm < problem.eps) {
      traj.reason = StopReason::tolerance_met;
      return traj;
    }
    if (k == problem.max_iter) break;

    RMat fisher;
    try {
      fisher = fisher_metric(system, theta);
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
      const RVec candidate = theta - step * direction;
      if (!system.in_domain(candidate)) {
        saw_domain_exit = true;
        continue;
      }
      if (karcher_cost(HpdMatrix(chart.matrix_of(candidate)), problem.inputs) >
          cost + kAscentSlack) {
        continue;
      }
      theta = candidate;
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

/// One sampled curve of the triangle figure.
struct SampledCurve {
  std::string name;
  std::vector<double> ts;
  std::vector<HpdMatrix> points;
};

struct MedianPairDistance {
  std::string first;
  std::string second;
  double min_distance = 0.0;
};

/// Three sides, three vertex-to-opposite-midpoint medians, and the pairwise
/// minimum distances between the medians.
struct TriangleReport {
  std::vector<SampledCurve> curves;
  std::vector<MedianPairDistance> median_pairs;
};

namespace detail {

inline double min_distance_between(const GeodesicSegment& f, const GeodesicSegment& g) {
  constexpr int kCoarse = 33;
  std::vector<HpdMatrix> fs, gs;
  fs.reserve(kCoarse);
  gs.reserve(kCoarse);
  for (int i = 0; i < kCoarse; ++i) {
    const double t = static_cast<double>(i) / (kCoarse - 1);
    fs.push_back(f.evaluate(t));
    gs.push_back(g.evaluate(t));
  }
  double best = std::numeric_limits<double>::infinity();
  double best_s = 0.0, best_t = 0.0;
  for (int i = 0; i < kCoarse; ++i) {
    for (int j = 0; j < kCoarse; ++j) {
      const double d = distance(fs[i], gs[j]);
      if (d < best) {
        best = d;
        best_s = static_cast<double>(i) / (kCoarse - 1);
        best_t = static_cast<double>(j) / (kCoarse - 1);
      }
    }
  }

  double span = 1.0 / 16.0;
  constexpr int kRounds = 14;
  constexpr int kLocal = 9;
  for (int round = 0; round < kRounds; ++round) {
    const double s_lo = std::max(0.0, best_s - span);
    const double s_hi = std::min(1.0, best_s + span);
    const double t_lo = std::max(0.0, best_t - span);
    const double t_hi = std::min(1.0, best_t + span);
    std::vector<HpdMatrix> fr, gr;
    std::vector<double> ss, tt;
    for (int i = 0; i < kLocal; ++i) {
      const double s = s_lo + (s_hi - s_lo) * i / (kLocal - 1);
      const double t = t_lo + (t_hi - t_lo) * i / (kLocal - 1);
      ss.push_back(s);
      tt.push_back(t);
      fr.push_back(f.evaluate(s));
      gr.push_back(g.evaluate(t));
    }
    for (int i = 0; i < kLocal; ++i) {
      for (int j = 0; j < kLocal; ++j) {
        const double d = distance(fr[i], gr[j]);
        if (d < best) {
          best = d;
          best_s = ss[i];
          best_t = tt[j];
        }
      }
    }
    span *= 0.25;
  }
  return best;
}

inline SampledCurve sample_segment(std::string name, const GeodesicSegment& seg, int samples) {
  SampledCurve curve;
  curve.name = std::move(name);
  curve.ts.reserve(samples);
  curve.points.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / (samples - 1);
    curve.ts.push_back(t);
    curve.points.push_back(seg.evaluate(t));
  }
  return curve;
}

}  // namespace detail

/// Sides and medians of the geodesic triangle on R1, R2, R3, with the pairwise
/// minimum distances between medians (which need not intersect).
inline TriangleReport geodesic_triangle(const HpdMatrix& r1, const HpdMatrix& r2,
                                        const HpdMatrix& r3, int samples) {
  check_same_dim(r1.mat(), r2.mat(), "geodesic_triangle");
  check_same_dim(r1.mat(), r3.mat(), "geodesic_triangle");
  if (samples < 2) throw InputError("geodesic_triangle: need at least 2 samples per curve");
  if (detail::same_point(r1.mat(), r2.mat()) || detail::same_point(r2.mat(), r3.mat()) ||
      detail::same_point(r1.mat(), r3.mat())) {
    throw InputError("geodesic_triangle: vertices must be pairwise distinct");
  }

  const GeodesicSegment side12(r1, r2), side23(r2, r3), side31(r3, r1);
  const GeodesicSegment median1(r1, side23.evaluate(0.5));
  const GeodesicSegment median2(r2, side31.evaluate(0.5));
  const GeodesicSegment median3(r3, side12.evaluate(0.5));

  TriangleReport report;
  report.curves.push_back(detail::sample_segment("side_12", side12, samples));
  report.curves.push_back(detail::sample_segment("side_23", side23, samples));
  report.curves.push_back(detail::sample_segment("side_31", side31, samples));
  report.curves.push_back(detail::sample_segment("median_1", median1, samples));
  report.curves.push_back(detail::sample_segment("median_2", median2, samples));
  report.curves.push_back(detail::sample_segment("median_3", median3, samples));
  report.median_pairs.push_back(
      {"median_1", "median_2", detail::min_distance_between(median1, median2)});
  report.median_pairs.push_back(
      {"median_1", "median_3", detail::min_distance_between(median1, median3)});
  report.median_pairs.push_back(
      {"median_2", "median_3", detail::min_distance_between(median2, median3)});
  return report;
}

}  // namespace hpdgeo
