// Steers a 2x2 parametrized Hermitian system toward a target matrix with both
// controllers and prints how fast each one closes the distance.

#include <cstdio>
#include <iostream>

#include "hpdgeo/hpdgeo.hpp"

int main() {
  using namespace hpdgeo;

  ParamSystem system = make_m1_system();
  const HpdMatrix target = steering_demo_target_1();
  RVec u0(3);
  u0 << 1.0, 2.0, 1.0;

  std::cout << "target: " << matrix_to_json(target.mat()) << "\n";
  std::cout << "start distance: "
            << format_g12(distance(system.output_at(u0), target)) << "\n\n";

  for (const bool riemannian : {true, false}) {
    const double eta = riemannian ? kRiemannianControlEta : kNaturalControlEta;
    ControlProblem problem(system, target, u0, eta);
    problem.eps = 1e-12;
    const Trajectory traj =
        riemannian ? run_riemannian_control(problem) : run_natural_control(problem);

    const TrajectoryStep& last = traj.final_step();
    std::cout << (riemannian ? "riemannian" : "natural") << " controller ("
              << to_string(traj.reason) << " after " << traj.iterations()
              << " iterations)\n";
    std::cout << "  final u = (";
    for (Eigen::Index i = 0; i < last.u->size(); ++i) {
      std::cout << (i ? ", " : "") << format_g12((*last.u)(i));
    }
    std::cout << ")\n";
    std::cout << "  final distance to target = "
              << format_g12(std::sqrt(last.cost)) << "\n\n";
  }
  return 0;
}
