#include <cmath>
#include <set>

#include <fmt/format.h>

#include "hambif/error.hpp"
#include "hambif/model.hpp"

namespace hambif {

namespace {

double param(const PresetParams& params, const PresetParams& defaults, const std::string& key) {
  if (auto it = params.find(key); it != params.end()) return it->second;
  if (auto it = defaults.find(key); it != defaults.end()) return it->second;
  throw Error(ErrorCode::MissingParameter, fmt::format("parameter '{}' is required", key));
}

const PresetInfo& lookup(const std::string& name) {
  static const std::vector<PresetInfo> catalog = preset_catalog();
  for (const auto& info : catalog) {
    if (info.name == name) return info;
  }
  throw Error(ErrorCode::UnknownPreset, fmt::format("unknown preset '{}'", name));
}

void reject_unknown_keys(const PresetInfo& info, const PresetParams& params,
                         const std::set<std::string>& extra = {}) {
  for (const auto& [key, value] : params) {
    if (info.defaults.count(key) == 0 && extra.count(key) == 0) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("preset '{}' has no parameter '{}'", info.name, key));
    }
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("parameter '{}' is not finite", key));
    }
  }
}

// Frequencies beyond the catalog defaults are addressed as w3, w4, ...
bool is_frequency_key(const std::string& key) {
  if (key.size() < 2 || key[0] != 'w') return false;
  for (std::size_t i = 1; i < key.size(); ++i) {
    if (key[i] < '0' || key[i] > '9') return false;
  }
  return true;
}

double satellite_c(const PresetParams& params, const PresetParams& defaults) {
  if (auto it = params.find("c"); it != params.end()) return it->second;
  const double radius = param(params, defaults, "radius");
  return 0.5 * radius * radius * param(params, defaults, "j2");
}

HamiltonianSystem harmonic_system(double beta) {
  HamiltonianSystem sys;
  sys.half_dim = 1;
  sys.name = "harmonic";
  const double b2 = beta * beta;
  sys.energy = [b2](const Vector& z) { return 0.5 * (z[1] * z[1] + b2 * z[0] * z[0]); };
  sys.gradient = [b2](const Vector& z) {
    Vector g(2);
    g << b2 * z[0], z[1];
    return g;
  };
  sys.hessian = [b2](const Vector&) {
    Matrix h = Matrix::Zero(2, 2);
    h(0, 0) = b2;
    h(1, 1) = 1.0;
    return h;
  };
  sys.probe_center = Vector::Zero(2);
  return sys;
}

HamiltonianSystem coupled_springs_system(const Vector& w2, double coupling) {
  NewtonianPotential pot;
  pot.dim = static_cast<int>(w2.size());
  pot.name = "coupled-springs";
  pot.potential = [w2, coupling](const Vector& q) {
    const double r2 = q.squaredNorm();
    return 0.5 * q.dot(w2.cwiseProduct(q)) + 0.25 * coupling * r2 * r2;
  };
  pot.gradient = [w2, coupling](const Vector& q) -> Vector {
    return w2.cwiseProduct(q) + coupling * q.squaredNorm() * q;
  };
  pot.hessian = [w2, coupling](const Vector& q) -> Matrix {
    const auto n = q.size();
    Matrix h = w2.asDiagonal();
    h += coupling * (q.squaredNorm() * Matrix::Identity(n, n) + 2.0 * q * q.transpose());
    return h;
  };
  return newtonian_to_hamiltonian(pot);
}

}  // namespace

double oblate_potential(const Eigen::Vector3d& q, double c) {
  const double d = q.norm();
  const double d3 = d * d * d;
  const double d5 = d3 * d * d;
  return -1.0 / d - c / d3 + 3.0 * c * q[2] * q[2] / d5;
}

Eigen::Vector3d oblate_gradient(const Eigen::Vector3d& q, double c) {
  const double d = q.norm();
  const double d2 = d * d;
  const double d5 = d2 * d2 * d;
  const double d7 = d5 * d2;
  const double q3 = q[2];
  Eigen::Vector3d g = q / (d2 * d) + 3.0 * c * q / d5 - 15.0 * c * q3 * q3 * q / d7;
  g[2] += 6.0 * c * q3 / d5;
  return g;
}

Eigen::Matrix3d oblate_hessian(const Eigen::Vector3d& q, double c) {
  const double d = q.norm();
  const double d2 = d * d;
  const double d3 = d2 * d;
  const double d5 = d3 * d2;
  const double d7 = d5 * d2;
  const double d9 = d7 * d2;
  const double q3 = q[2];
  const Eigen::Matrix3d eye = Eigen::Matrix3d::Identity();
  const Eigen::Matrix3d qq = q * q.transpose();
  const Eigen::Vector3d e3 = Eigen::Vector3d::UnitZ();
  Eigen::Matrix3d h = eye / d3 - 3.0 * qq / d5;
  h += 3.0 * c * (eye / d5 - 5.0 * qq / d7);
  h += 3.0 * c *
       (2.0 * e3 * e3.transpose() / d5 - 10.0 * q3 * (e3 * q.transpose() + q * e3.transpose()) / d7 +
        q3 * q3 * (-5.0 * eye / d7 + 35.0 * qq / d9));
  return h;
}

HamiltonianSystem satellite_system(double omega, double c) {
  if (!(omega > 0.0) || !(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "satellite needs omega > 0 and c > 0");
  HamiltonianSystem sys;
  sys.half_dim = 3;
  sys.name = "satellite";
  sys.energy = [omega, c](const Vector& z) {
    const Eigen::Vector3d p = z.tail<3>();
    return 0.5 * p.squaredNorm() + omega * (z[0] * z[4] - z[1] * z[3]) + oblate_potential(z.head<3>(), c);
  };
  sys.gradient = [omega, c](const Vector& z) {
    const Eigen::Vector3d gv = oblate_gradient(z.head<3>(), c);
    Vector g(6);
    g[0] = gv[0] + omega * z[4];
    g[1] = gv[1] - omega * z[3];
    g[2] = gv[2];
    g[3] = z[3] - omega * z[1];
    g[4] = z[4] + omega * z[0];
    g[5] = z[5];
    return g;
  };
  sys.hessian = [omega, c](const Vector& z) {
    Matrix h = Matrix::Zero(6, 6);
    h.topLeftCorner<3, 3>() = oblate_hessian(z.head<3>(), c);
    h.bottomRightCorner<3, 3>().setIdentity();
    h(0, 4) = h(4, 0) = omega;
    h(1, 3) = h(3, 1) = -omega;
    return h;
  };
  // Simultaneous rotation of (q1, q2) and (p1, p2) about the symmetry axis.
  Matrix x = Matrix::Zero(6, 6);
  x(0, 1) = -1.0;
  x(1, 0) = 1.0;
  x(3, 4) = -1.0;
  x(4, 3) = 1.0;
  sys.symmetry.generators.push_back(x);
  const double d0 = satellite_equilibrium_distance(omega, c);
  sys.probe_center = Vector::Zero(6);
  sys.probe_center << d0, 0.0, 0.0, 0.0, -omega * d0, 0.0;
  sys.probe_spread = 0.1 * d0;
  return sys;
}

std::vector<PresetInfo> preset_catalog() {
  return {
      {"satellite",
       {{"omega", kEarthOmega}, {"j2", kEarthJ2}, {"radius", 1.0}},
       "Satellite near a geostationary orbit of an oblate rotating body, in the co-rotating frame "
       "(units GM = 1). c = radius^2 * j2 / 2 unless c is given; defaults are Earth-like "
       "(J2 = 1.0826359e-3, radius 1, sidereal rotation rate)."},
      {"harmonic", {{"beta", 1.0}}, "Linear oscillator H = (p^2 + beta^2 q^2) / 2."},
      {"coupled-springs",
       {{"n", 2.0}, {"w1", 1.0}, {"w2", 2.0}, {"coupling", 0.1}},
       "Newtonian springs U = sum w_i^2 q_i^2 / 2 + coupling |q|^4 / 4; frequencies beyond w2 are "
       "given as w3, w4, ..."},
  };
}

HamiltonianSystem preset(const std::string& name, const PresetParams& params) {
  const PresetInfo& info = lookup(name);
  if (name == "satellite") {
    reject_unknown_keys(info, params, {"c"});
    return satellite_system(param(params, info.defaults, "omega"), satellite_c(params, info.defaults));
  }
  if (name == "harmonic") {
    reject_unknown_keys(info, params);
    const double beta = param(params, info.defaults, "beta");
    if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
    return harmonic_system(beta);
  }
  // coupled-springs
  std::set<std::string> extra;
  for (const auto& [key, value] : params) {
    if (is_frequency_key(key)) extra.insert(key);
  }
  reject_unknown_keys(info, params, extra);
  const double n_raw = param(params, info.defaults, "n");
  const int n = static_cast<int>(std::lround(n_raw));
  if (n < 1 || std::abs(n_raw - n) > 0.0) throw Error(ErrorCode::InvalidArgument, "n must be a positive integer");
  Vector w2(n);
  for (int i = 0; i < n; ++i) {
    const double w = param(params, info.defaults, fmt::format("w{}", i + 1));
    if (!(w > 0.0)) throw Error(ErrorCode::InvalidArgument, "spring frequencies must be positive");
    w2[i] = w * w;
  }
  return coupled_springs_system(w2, param(params, info.defaults, "coupling"));
}

Vector preset_guess(const std::string& name, const PresetParams& params) {
  const PresetInfo& info = lookup(name);
  if (name == "satellite") {
    // Start from the Kepler radius omega^2 d^3 = 1.
    const double omega = param(params, info.defaults, "omega");
    const double d = std::pow(omega, -2.0 / 3.0);
    Vector z = Vector::Zero(6);
    z[0] = d;
    z[4] = -omega * d;
    return z;
  }
  if (name == "harmonic") return Vector::Zero(2);
  const int n = static_cast<int>(std::lround(param(params, info.defaults, "n")));
  return Vector::Zero(2 * std::max(n, 1));
}

}  // namespace hambif
