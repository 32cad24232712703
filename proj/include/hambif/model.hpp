#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hambif/linalg.hpp"

namespace hambif {

using EnergyFn = std::function<double(const Vector&)>;
using GradientFn = std::function<Vector(const Vector&)>;
using HessianFn = std::function<Matrix(const Vector&)>;

/// Connected symmetry group given by Lie-algebra generators of an orthogonal
/// representation commuting with J. No generators means the trivial group.
struct SymmetryGroup {
  std::vector<Matrix> generators;

  int group_dim() const { return static_cast<int>(generators.size()); }
  bool trivial() const { return generators.empty(); }

  /// exp(sum_i t_i X_i); `times` must have one entry per generator.
  Matrix element(const std::vector<double>& times) const;

  /// Largest of |X^T + X| and |XJ - JX| over the generators (max-abs entry).
  double validity_defect(int half_dim) const;
};

/// Autonomous Hamiltonian on R^{2N}, phase coordinates ordered (q, p).
/// Evaluators must be pure and reentrant.
struct HamiltonianSystem {
  int half_dim = 1;
  EnergyFn energy;
  std::optional<GradientFn> gradient;
  std::optional<HessianFn> hessian;
  SymmetryGroup symmetry;
  std::string name;
  /// Centre for random probes (invariance and equivariance checks); the
  /// energy must be smooth in a neighbourhood of it.
  Vector probe_center;
  double probe_spread = 1.0;

  int dim() const { return 2 * half_dim; }
};

Vector gradient_of(const HamiltonianSystem& system, const Vector& z);
Matrix hessian_of(const HamiltonianSystem& system, const Vector& z);

/// Central-difference fallbacks (step eps * (1 + |z_i|)); the Hessian is
/// symmetrised.
Vector fd_gradient(const EnergyFn& energy, const Vector& z, double eps = 1e-6);
Matrix fd_hessian(const EnergyFn& energy, const Vector& z, double eps = 1e-4);

struct InvarianceReport {
  bool passed = true;
  double max_violation = 0.0;
  int samples = 0;
};

/// Samples |H(gamma z) - H(z)| / (1 + |H(z)|) at random z around the probe
/// centre and random one-parameter group elements.
InvarianceReport invariance_check(const HamiltonianSystem& system, int samples, std::uint64_t seed = 1);

/// Largest |grad H(gamma z) - gamma grad H(z)| over random probes.
double gradient_equivariance_defect(const HamiltonianSystem& system, int samples, std::uint64_t seed = 1);

/// Group orbit through a critical point and its orthogonal section.
struct EquilibriumOrbit {
  Vector z0;
  double gradient_norm = 0.0;
  Matrix tangent_basis;  // columns span T_{z0} Gamma(z0)
  Matrix section_basis;  // columns span its orthogonal complement
  int orbit_dim = 0;
  int iterations = 0;
};

/// Tangent and section bases of the group orbit through z.
EquilibriumOrbit orbit_geometry(const HamiltonianSystem& system, const Vector& z);

/// Newton on the gradient restricted to the orthogonal section of the group
/// orbit through the current iterate. At most 50 iterations.
EquilibriumOrbit refine_equilibrium(const HamiltonianSystem& system, const Vector& guess);

/// Potential U on R^N for a second-order system q'' = -grad U(q).
struct NewtonianPotential {
  int dim = 1;
  EnergyFn potential;
  std::optional<GradientFn> gradient;
  std::optional<HessianFn> hessian;
  std::vector<Matrix> generators;  // N x N, skew-symmetric
  std::string name;
};

/// H(q, r) = |r|^2 / 2 + U(q) with generators lifted diagonally.
HamiltonianSystem newtonian_to_hamiltonian(const NewtonianPotential& potential);

using PresetParams = std::map<std::string, double>;

struct PresetInfo {
  std::string name;
  PresetParams defaults;
  std::string description;
};

std::vector<PresetInfo> preset_catalog();

/// Builds "satellite", "harmonic" or "coupled-springs". Parameters missing
/// from `params` take the catalog defaults.
HamiltonianSystem preset(const std::string& name, const PresetParams& params = {});

/// Suggested Newton start for the preset's equilibrium.
Vector preset_guess(const std::string& name, const PresetParams& params = {});

/// Unique positive root of omega^2 d^5 - d^2 - 3c = 0.
double satellite_equilibrium_distance(double omega, double c);

/// Earth oblateness coefficient and rotation rate in units GM = R = 1.
inline constexpr double kEarthJ2 = 1.0826359e-3;
inline constexpr double kEarthOmega = 0.0588336022433599;

/// Potential of an oblate body, V(q) = -1/d - c/d^3 + 3 c q3^2 / d^5 with
/// d = |q|, and its derivatives.
double oblate_potential(const Eigen::Vector3d& q, double c);
Eigen::Vector3d oblate_gradient(const Eigen::Vector3d& q, double c);
Eigen::Matrix3d oblate_hessian(const Eigen::Vector3d& q, double c);

/// Hamiltonian of a satellite in a frame rotating with angular velocity
/// omega about the symmetry axis of an oblate body.
HamiltonianSystem satellite_system(double omega, double c);

}  // namespace hambif
