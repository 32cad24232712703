#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hambif/analysis.hpp"
#include "hambif/linalg.hpp"
#include "hambif/model.hpp"

namespace hambif {

/// Truncated Fourier series z(t) = a0 + sum_{k=1}^{M} a_k cos kt + b_k sin kt
/// of a 2 pi-periodic solution of z' = lambda J grad H(z). The physical
/// period in the original time is 2 pi lambda.
struct FourierOrbit {
  Vector a0;
  std::vector<Vector> a;
  std::vector<Vector> b;
  double lambda = 1.0;
  /// Max over the check grid of |z' - lambda J grad H(z)|.
  double residual = 0.0;
  /// Sobolev-weighted norm of z - z0.
  double amplitude = 0.0;

  int modes() const { return static_cast<int>(a.size()); }
  int dim() const { return static_cast<int>(a0.size()); }
  double period() const;
  Vector value(double t) const;
  Vector derivative(double t) const;
  /// Coefficient energy |a_k|^2 + |b_k|^2 of mode k >= 1.
  double mode_energy(int k) const;
};

/// H^{1/2} norm: 2 pi |a0 - z0|^2 + pi sum k (|a_k|^2 + |b_k|^2), square-rooted.
double sobolev_norm(const FourierOrbit& orbit, const Vector& z0);

/// max_t |z(t) - z0| sampled on `points` equispaced times.
double sup_distance(const FourierOrbit& orbit, const Vector& z0, int points);

/// Residual vectors z'(t_i) - lambda J grad H(z(t_i)) at equispaced t_i.
std::vector<Vector> residual_field(const HamiltonianSystem& system, const FourierOrbit& orbit, int points);
double max_residual(const HamiltonianSystem& system, const FourierOrbit& orbit, int points);

/// max_t |H(z(t)) - mean| / |mean| over `points` equispaced times.
double energy_variation(const HamiltonianSystem& system, const FourierOrbit& orbit, int points);

/// gamma z(t + theta), i.e. the group and time-shift action on an orbit.
FourierOrbit transform_orbit(const FourierOrbit& orbit, const Matrix& gamma, double theta);

struct KernelDirection {
  Vector a1;
  Vector b1;
  double singular_value = 0.0;
  int kernel_dim = 0;
};

/// Unit null vector (a1, b1) of T_{1,lambda0}(Hessian at z0).
KernelDirection kernel_direction(const HamiltonianSystem& system, const EquilibriumOrbit& eq,
                                 const BifurcationCandidate& candidate);

struct OrbitSolverOptions {
  int modes = 8;
  int max_modes = 64;
  /// Accept when the residual is below this; <= 0 selects 1e-9 (1 + |z0|).
  double tolerance = 0.0;
  int max_iterations = 40;
  double fd_step = 1e-7;
};

/// Solves for the orbit of pinned amplitude `amplitude` on the branch
/// through (z0, lambda0). Unknowns are the Fourier coefficients and lambda,
/// plus unfolding multipliers for the energy and each group momentum which
/// vanish on solutions. Bordering rows pin the amplitude, fix the time phase
/// against the predictor and fix the group drift of a0.
FourierOrbit solve_orbit(const HamiltonianSystem& system, const EquilibriumOrbit& eq,
                         const BifurcationCandidate& candidate, double amplitude,
                         const OrbitSolverOptions& options = {},
                         const std::optional<FourierOrbit>& initial_guess = std::nullopt);

struct BranchOptions {
  int steps = 8;
  double s0 = 1e-3;
  double growth = 2.0;
  OrbitSolverOptions solver;
};

enum class PeriodClass { Minimal, Subharmonic, Undetermined };

std::string_view to_string(PeriodClass c);

struct Branch {
  BifurcationCandidate candidate;
  Vector z0;
  std::vector<FourierOrbit> orbits;
  std::vector<std::pair<double, double>> period_trend;        // (amplitude, 2 pi lambda)
  std::vector<std::pair<double, double>> sup_distance_trend;  // (amplitude, max |z - z0|)
  /// Set when a step failed; the orbits before it are retained.
  std::optional<std::string> failure;
  /// Violations of the branch invariants found by validate().
  std::vector<std::string> issues;

  bool complete(int steps) const { return !failure && static_cast<int>(orbits.size()) == steps; }
};

/// Orbits at amplitudes s0 growth^i, i = 0..steps-1, each warm-started from
/// its predecessor.
Branch continue_branch(const HamiltonianSystem& system, const EquilibriumOrbit& eq,
                       const BifurcationCandidate& candidate, const BranchOptions& options = {});

PeriodClass minimal_period_check(const FourierOrbit& orbit);

}  // namespace hambif
