#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hpdgeo/control.hpp"
#include "hpdgeo/io.hpp"
#include "hpdgeo/karcher.hpp"
#include "hpdgeo/param_system.hpp"

namespace hpdgeo {

/// Cost level at which the per-algorithm speed comparison is read off.
inline constexpr double kSpeedThreshold = 1e-10;
/// Demo presets stop at 1e-12 instead of the library default 1e-15, which the
/// slower linear-rate runs cannot reliably reach in double precision.
inline constexpr double kDemoEps = 1e-12;

inline CMat matrix2(Complex a00, Complex a01, Complex a10, Complex a11) {
  CMat m(2, 2);
  m << a00, a01, a10, a11;
  return m;
}

inline HpdMatrix steering_demo_target_1() {
  return HpdMatrix(matrix2(55.0, Complex(0, 2), Complex(0, -2), 45.0));
}
inline RVec steering_demo_start_1() {
  RVec u(3);
  u << 1.0, 2.0, 1.0;
  return u;
}

inline HpdMatrix steering_demo_target_2() {
  return HpdMatrix(matrix2(50.0, Complex(0, 20), Complex(0, -20), 40.0));
}
inline RVec steering_demo_start_2() {
  RVec u(2);
  u << 1.0, 4.0;
  return u;
}

inline std::vector<HpdMatrix> mean_demo_inputs_1() {
  return {HpdMatrix(matrix2(5.0, Complex(1, 2), Complex(1, -2), 5.0)),
          HpdMatrix(matrix2(4.0, Complex(1, -1), Complex(1, 1), 4.0))};
}

inline std::vector<HpdMatrix> mean_demo_inputs_2() {
  return {HpdMatrix(matrix2(3.0, Complex(1.5, 2), Complex(1.5, -2), 3.0)),
          HpdMatrix(matrix2(2.0, Complex(1, -1), Complex(1, 1), 2.0)),
          HpdMatrix(matrix2(4.0, Complex(1, 2), Complex(1, -2), 4.0))};
}

struct DemoOverrides {
  std::optional<double> eta;
  std::optional<double> eps;
  std::optional<int> max_iter;
};

struct AlgorithmReport {
  std::string algorithm;
  StopReason reason = StopReason::max_iterations;
  bool converged = false;
  int iterations = 0;
  double final_cost = 0.0;
  double final_grad_norm = 0.0;
  /// First k whose comparison cost drops to kSpeedThreshold; -1 if never.
  int iterations_to_threshold = -1;
  double wall_seconds = 0.0;
  std::string trajectory_file;
  Trajectory trajectory;
};

struct RunReport {
  std::string demo;
  std::vector<AlgorithmReport> algorithms;

  const AlgorithmReport* find(const std::string& algorithm) const {
    for (const AlgorithmReport& a : algorithms) {
      if (a.algorithm == algorithm) return &a;
    }
    return nullptr;
  }
};

namespace detail {

inline int first_step_at_cost(const Trajectory& traj, double threshold) {
  for (const TrajectoryStep& s : traj.steps) {
    if (s.cost <= threshold) return s.k;
  }
  return -1;
}

inline int first_step_near_reference(const Trajectory& traj, const HpdMatrix& ref,
                                     double threshold) {
  for (const TrajectoryStep& s : traj.steps) {
    const double d = distance(s.point, ref);
    if (d * d <= threshold) return s.k;
  }
  return -1;
}

inline AlgorithmReport summarize(std::string algorithm, Trajectory traj, double wall_seconds,
                                 int to_threshold) {
  AlgorithmReport r;
  r.algorithm = std::move(algorithm);
  r.reason = traj.reason;
  r.converged = traj.converged();
  r.iterations = traj.iterations();
  r.final_cost = traj.final_step().cost;
  r.final_grad_norm = traj.final_step().grad_norm;
  r.iterations_to_threshold = to_threshold;
  r.wall_seconds = wall_seconds;
  r.trajectory = std::move(traj);
  return r;
}

template <typename F>
std::pair<Trajectory, double> timed(F&& run) {
  const auto start = std::chrono::steady_clock::now();
  Trajectory traj = run();
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return {std::move(traj), elapsed.count()};
}

}  // namespace detail

/// Wall time is deliberately left out, and trajectory files are referenced by
/// basename (they sit next to the report), so identical configurations produce
/// byte-identical report files regardless of the output directory.
inline std::string report_to_json(const RunReport& report) {
  std::ostringstream os;
  os << "{\"demo\":\"" << report.demo << "\",\"algorithms\":[";
  for (std::size_t i = 0; i < report.algorithms.size(); ++i) {
    const AlgorithmReport& a = report.algorithms[i];
    if (i) os << ",";
    os << "{\"algorithm\":\"" << a.algorithm << "\",\"stop_reason\":\"" << to_string(a.reason)
       << "\",\"converged\":" << (a.converged ? "true" : "false")
       << ",\"iterations\":" << a.iterations << ",\"final_cost\":" << format_g12(a.final_cost)
       << ",\"final_grad_norm\":" << format_g12(a.final_grad_norm)
       << ",\"iterations_to_cost_1e-10\":" << a.iterations_to_threshold;
    if (!a.trajectory_file.empty()) {
      const std::string base = std::filesystem::path(a.trajectory_file).filename().string();
      os << ",\"trajectory\":\"" << base << "\"";
    }
    os << "}";
  }
  os << "]}";
  return os.str();
}

inline bool is_demo_name(const std::string& name) {
  return name == "example-3.1" || name == "example-3.2" || name == "example-4.1" ||
         name == "example-4.2";
}

/// Run a named preset (both algorithms where both apply), write trajectory CSVs and
/// a report JSON into out_dir, and return the report.
inline RunReport run_demo(const std::string& name, const std::string& out_dir,
                          const DemoOverrides& overrides = {}) {
  RunReport report;
  report.demo = name;
  const double eps = overrides.eps.value_or(kDemoEps);
  const int max_iter = overrides.max_iter.value_or(kDefaultMaxIter);
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);  // write errors are reported below
  }
  const std::string prefix = out_dir.empty() ? name : out_dir + "/" + name;

  if (name == "example-3.1" || name == "example-3.2") {
    const bool first = (name == "example-3.1");
    ParamSystem system = first ? make_m1_system() : make_m2_system();
    const HpdMatrix target = first ? steering_demo_target_1() : steering_demo_target_2();
    const RVec u0 = first ? steering_demo_start_1() : steering_demo_start_2();

    if (first) {
      ControlProblem rp(system, target, u0, overrides.eta.value_or(kRiemannianControlEta));
      rp.eps = eps;
      rp.max_iter = max_iter;
      auto [traj, wall] = detail::timed([&] { return run_riemannian_control(rp); });
      AlgorithmReport a = detail::summarize(
          "riemannian", std::move(traj), wall, 0);
      a.iterations_to_threshold = detail::first_step_at_cost(a.trajectory, kSpeedThreshold);
      a.trajectory_file = prefix + "-riemannian.csv";
      write_text_file(a.trajectory_file, control_trajectory_csv(a.trajectory));
      report.algorithms.push_back(std::move(a));
    }

    ControlProblem np(system, target, u0, overrides.eta.value_or(kNaturalControlEta));
    np.eps = eps;
    np.max_iter = max_iter;
    auto [traj, wall] = detail::timed([&] { return run_natural_control(np); });
    AlgorithmReport a = detail::summarize("natural", std::move(traj), wall, 0);
    a.iterations_to_threshold = detail::first_step_at_cost(a.trajectory, kSpeedThreshold);
    a.trajectory_file = prefix + "-natural.csv";
    write_text_file(a.trajectory_file, control_trajectory_csv(a.trajectory));
    report.algorithms.push_back(std::move(a));
  } else if (name == "example-4.1" || name == "example-4.2") {
    const std::vector<HpdMatrix> inputs =
        (name == "example-4.1") ? mean_demo_inputs_1() : mean_demo_inputs_2();

    // Algorithm-independent reference for the speed comparison: the closed-form
    // midpoint for two inputs, otherwise a tightly converged mean.
    HpdMatrix reference = [&] {
      if (inputs.size() == 2) return midpoint(inputs[0], inputs[1]);
      MeanProblem tight(inputs, kNaturalMeanEta);
      tight.eps = 1e-13;
      tight.max_iter = 1000;
      return run_natural_mean(tight).final_step().point;
    }();

    MeanProblem rp(inputs, overrides.eta.value_or(riemannian_mean_default_eta(inputs.size())));
    rp.eps = eps;
    rp.max_iter = max_iter;
    auto [rtraj, rwall] = detail::timed([&] { return run_riemannian_mean(rp); });
    AlgorithmReport ra = detail::summarize("riemannian", std::move(rtraj), rwall, 0);
    ra.iterations_to_threshold =
        detail::first_step_near_reference(ra.trajectory, reference, kSpeedThreshold);
    ra.trajectory_file = prefix + "-riemannian.csv";
    write_text_file(ra.trajectory_file, mean_trajectory_csv(ra.trajectory));
    report.algorithms.push_back(std::move(ra));

    MeanProblem np(inputs, overrides.eta.value_or(kNaturalMeanEta));
    np.eps = eps;
    np.max_iter = max_iter;
    auto [ntraj, nwall] = detail::timed([&] { return run_natural_mean(np); });
    AlgorithmReport na = detail::summarize("natural", std::move(ntraj), nwall, 0);
    na.iterations_to_threshold =
        detail::first_step_near_reference(na.trajectory, reference, kSpeedThreshold);
    na.trajectory_file = prefix + "-natural.csv";
    write_text_file(na.trajectory_file, mean_trajectory_csv(na.trajectory));
    report.algorithms.push_back(std::move(na));
  } else {
    throw InputError("run_demo: unknown demo \"" + name +
                     "\" (expected example-3.1, example-3.2, example-4.1, or example-4.2)");
  }

  write_text_file(prefix + "-report.json", report_to_json(report) + "\n");
  return report;
}

}  // namespace hpdgeo
