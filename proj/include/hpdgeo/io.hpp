#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hpdgeo/control.hpp"
#include "hpdgeo/karcher.hpp"
#include "hpdgeo/matrix.hpp"
#include "hpdgeo/param_system.hpp"

namespace hpdgeo {

/// All human-facing numbers are printed with 12 significant digits.
inline std::string format_g12(double x) {
  if (x == 0.0) x = 0.0;  // normalize -0
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return std::string(buf);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  if (!in.good() && !in.eof()) throw IoError("cannot read file: " + path);
  return os.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << content;
  if (!out.good()) throw IoError("cannot write file: " + path);
}

/// {"n": n, "entries": [[[re, im], ...], ...]} row-major, 12 significant digits.
inline std::string matrix_to_json(const CMat& a) {
  std::ostringstream os;
  os << "{\"n\":" << a.rows() << ",\"entries\":[";
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (i) os << ",";
    os << "[";
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j) os << ",";
      os << "[" << format_g12(a(i, j).real()) << "," << format_g12(a(i, j).imag()) << "]";
    }
    os << "]";
  }
  os << "]}";
  return os.str();
}

inline void write_matrix_file(const std::string& path, const CMat& a) {
  write_text_file(path, matrix_to_json(a) + "\n");
}

inline CMat matrix_from_json(const nlohmann::json& j, const std::string& context) {
  if (!j.is_object() || !j.contains("n") || !j.contains("entries")) {
    throw ParseError(context + ": expected an object with \"n\" and \"entries\"");
  }
  if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1) {
    throw ParseError(context + ": \"n\" must be a positive integer");
  }
  const Eigen::Index n = j["n"].get<Eigen::Index>();
  const auto& entries = j["entries"];
  if (!entries.is_array() || static_cast<Eigen::Index>(entries.size()) != n) {
    throw ParseError(context + ": \"entries\" must be an array of " + std::to_string(n) +
                     " rows");
  }
  CMat a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = entries[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw ParseError(context + ": row " + std::to_string(i) + " must have " +
                       std::to_string(n) + " entries");
    }
    for (Eigen::Index jcol = 0; jcol < n; ++jcol) {
      const auto& cell = row[jcol];
      if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() || !cell[1].is_number()) {
        throw ParseError(context + ": entry (" + std::to_string(i) + "," +
                         std::to_string(jcol) + ") must be a [re, im] pair of numbers");
      }
      a(i, jcol) = Complex(cell[0].get<double>(), cell[1].get<double>());
    }
  }
  if (!a.allFinite()) throw ParseError(context + ": matrix has non-finite entries");
  return a;
}

inline CMat parse_matrix_text(const std::string& text, const std::string& context) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(context + ": " + e.what());
  }
  return matrix_from_json(j, context);
}

inline HermitianMatrix parse_hermitian_file(const std::string& path) {
  return HermitianMatrix(parse_matrix_text(read_text_file(path), path));
}

inline HpdMatrix parse_hpd_file(const std::string& path) {
  return HpdMatrix(parse_matrix_text(read_text_file(path), path));
}

/// Linear system file: {"m": int, "n": int, "c0": <matrix, optional>, "basis": [<matrix> x m]}.
inline ParamSystem parse_system_file(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("m") || !j.contains("n") || !j.contains("basis")) {
    throw ParseError(path + ": expected an object with \"m\", \"n\", and \"basis\"");
  }
  if (!j["m"].is_number_integer() || j["m"].get<long long>() < 1) {
    throw ParseError(path + ": \"m\" must be a positive integer");
  }
  if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1) {
    throw ParseError(path + ": \"n\" must be a positive integer");
  }
  const int m = j["m"].get<int>();
  const Eigen::Index n = j["n"].get<Eigen::Index>();
  if (!j["basis"].is_array() || static_cast<int>(j["basis"].size()) != m) {
    throw ParseError(path + ": \"basis\" must be an array of " + std::to_string(m) +
                     " matrices");
  }
  std::vector<CMat> basis;
  basis.reserve(m);
  for (int i = 0; i < m; ++i) {
    CMat c = matrix_from_json(j["basis"][i], path + ": basis[" + std::to_string(i) + "]");
    if (c.rows() != n) {
      throw ParseError(path + ": basis[" + std::to_string(i) + "] is " +
                       std::to_string(c.rows()) + "x" + std::to_string(c.cols()) +
                       ", expected " + std::to_string(n) + "x" + std::to_string(n));
    }
    basis.push_back(std::move(c));
  }
  CMat c0;
  if (j.contains("c0")) {
    c0 = matrix_from_json(j["c0"], path + ": c0");
    if (c0.rows() != n) {
      throw ParseError(path + ": c0 is " + std::to_string(c0.rows()) + "x" +
                       std::to_string(c0.cols()) + ", expected " + std::to_string(n) + "x" +
                       std::to_string(n));
    }
  }
  return ParamSystem::linear(c0, std::move(basis));
}

namespace detail {

inline void append_entry_columns(std::ostringstream& os, const CMat& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      os << "," << format_g12(a(i, j).real()) << "," << format_g12(a(i, j).imag());
    }
  }
}

inline void append_entry_headers(std::ostringstream& os, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      os << ",R_" << i << "_" << j << "_re,R_" << i << "_" << j << "_im";
    }
  }
}

}  // namespace detail

/// Columns: k, u_1..u_m, J, grad_norm, dist_to_target.
inline std::string control_trajectory_csv(const Trajectory& traj) {
  if (traj.steps.empty()) throw InputError("control_trajectory_csv: empty trajectory");
  if (!traj.steps.front().u.has_value()) {
    throw InputError("control_trajectory_csv: trajectory carries no input coordinates");
  }
  const Eigen::Index m = traj.steps.front().u->size();
  std::ostringstream os;
  os << "k";
  for (Eigen::Index i = 1; i <= m; ++i) os << ",u_" << i;
  os << ",J,grad_norm,dist_to_target\n";
  for (const TrajectoryStep& s : traj.steps) {
    os << s.k;
    for (Eigen::Index i = 0; i < m; ++i) os << "," << format_g12((*s.u)(i));
    os << "," << format_g12(s.cost) << "," << format_g12(s.grad_norm) << ","
       << format_g12(std::sqrt(std::max(0.0, s.cost))) << "\n";
  }
  return os.str();
}

/// Columns: k, theta_1..theta_p (when coordinates are present) or the matrix entries
/// (re/im, row-major) otherwise, then L, grad_norm.
inline std::string mean_trajectory_csv(const Trajectory& traj) {
  if (traj.steps.empty()) throw InputError("mean_trajectory_csv: empty trajectory");
  std::ostringstream os;
  const bool has_theta = traj.steps.front().u.has_value();
  os << "k";
  if (has_theta) {
    for (Eigen::Index i = 1; i <= traj.steps.front().u->size(); ++i) os << ",theta_" << i;
  } else {
    detail::append_entry_headers(os, traj.steps.front().point.dim());
  }
  os << ",L,grad_norm\n";
  for (const TrajectoryStep& s : traj.steps) {
    os << s.k;
    if (has_theta) {
      for (Eigen::Index i = 0; i < s.u->size(); ++i) os << "," << format_g12((*s.u)(i));
    } else {
      detail::append_entry_columns(os, s.point.mat());
    }
    os << "," << format_g12(s.cost) << "," << format_g12(s.grad_norm) << "\n";
  }
  return os.str();
}

/// Columns: curve, t, matrix entries (re/im, row-major).
inline std::string curves_csv(const std::vector<SampledCurve>& curves) {
  if (curves.empty()) throw InputError("curves_csv: no curves");
  std::ostringstream os;
  os << "curve,t";
  detail::append_entry_headers(os, curves.front().points.front().dim());
  os << "\n";
  for (const SampledCurve& c : curves) {
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      os << c.name << "," << format_g12(c.ts[i]);
      detail::append_entry_columns(os, c.points[i].mat());
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace hpdgeo
