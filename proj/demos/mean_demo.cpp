// Computes the Karcher mean of three Toeplitz HPD matrices with the
// fixed-point solver and the chart-based natural-gradient solver, then checks
// that the logarithms of the inputs at the mean sum to zero.

#include <iostream>

#include "hpdgeo/hpdgeo.hpp"

int main() {
  using namespace hpdgeo;

  const std::vector<HpdMatrix> inputs = mean_demo_inputs_2();
  std::cout << "inputs:\n";
  for (const HpdMatrix& r : inputs) {
    std::cout << "  " << matrix_to_json(r.mat()) << "\n";
  }

  for (const bool riemannian : {true, false}) {
    const double eta =
        riemannian ? riemannian_mean_default_eta(inputs.size()) : kNaturalMeanEta;
    MeanProblem problem(inputs, eta);
    problem.eps = 1e-12;
    const Trajectory traj =
        riemannian ? run_riemannian_mean(problem) : run_natural_mean(problem);

    const HpdMatrix mean = traj.final_step().point;
    CMat log_sum = CMat::Zero(mean.dim(), mean.dim());
    for (const HpdMatrix& r : inputs) log_sum += log_map(mean, r).direction.mat();

    std::cout << "\n" << (riemannian ? "riemannian" : "natural") << " solver ("
              << to_string(traj.reason) << " after " << traj.iterations()
              << " iterations)\n";
    std::cout << "  mean = " << matrix_to_json(mean.mat()) << "\n";
    std::cout << "  cost = " << format_g12(traj.final_step().cost)
              << ", |sum of logs| = " << format_g12(frobenius_norm(log_sum)) << "\n";
  }
  return 0;
}
