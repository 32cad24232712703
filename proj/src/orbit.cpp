#include "hambif/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "hambif/error.hpp"

namespace hambif {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTailEnergyRel = 1e-10;

std::vector<double> grid(int points) {
  std::vector<double> t(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) t[i] = kTwoPi * i / points;
  return t;
}

FourierOrbit zero_orbit(const Vector& z0, int modes, double lambda) {
  FourierOrbit o;
  o.a0 = z0;
  o.a.assign(static_cast<std::size_t>(modes), Vector::Zero(z0.size()));
  o.b.assign(static_cast<std::size_t>(modes), Vector::Zero(z0.size()));
  o.lambda = lambda;
  return o;
}

FourierOrbit resized(const FourierOrbit& o, int modes) {
  FourierOrbit out = o;
  out.a.resize(static_cast<std::size_t>(modes), Vector::Zero(o.dim()));
  out.b.resize(static_cast<std::size_t>(modes), Vector::Zero(o.dim()));
  return out;
}

// Bordered harmonic-balance system. Unknown layout:
//   [a0 | a_1..a_M | b_1..b_M | lambda | sigma | mu_1..mu_g]
// Residual layout:
//   [Galerkin mode 0 | cos modes | sin modes | amplitude | phase | drift_1..drift_g]
// sigma and mu_i multiply grad H and grad I_i = -J X_i z (the momenta of the
// group generators). Both vanish on periodic solutions, and they make the
// square system regular despite the energy and momentum degeneracies.
class HarmonicBalance {
 public:
  HarmonicBalance(const HamiltonianSystem& system, const EquilibriumOrbit& eq, const Vector& pin_a,
                  const Vector& pin_b, double amplitude, int modes)
      : system_(system),
        z0_(eq.z0),
        n_(system.dim()),
        modes_(modes),
        points_(4 * modes),
        j_(standard_symplectic(system.half_dim)),
        pin_a_(pin_a),
        pin_b_(pin_b),
        amplitude_(amplitude) {
    for (const auto& x : system.symmetry.generators) {
      const Vector tangent = x * z0_;
      if (tangent.norm() <= 1e-8 * (1.0 + z0_.norm())) continue;
      momenta_.push_back(-j_ * x);
      tangents_.push_back(tangent / tangent.norm());
    }
    const auto t = grid(points_);
    cos_.resize(points_, modes_ + 1);
    sin_.resize(points_, modes_ + 1);
    for (int q = 0; q < points_; ++q) {
      for (int k = 0; k <= modes_; ++k) {
        cos_(q, k) = std::cos(k * t[q]);
        sin_(q, k) = std::sin(k * t[q]);
      }
    }
  }

  int unknowns() const { return n_ * (2 * modes_ + 1) + 2 + static_cast<int>(momenta_.size()); }

  Vector pack(const FourierOrbit& o) const {
    Vector x = Vector::Zero(unknowns());
    x.segment(0, n_) = o.a0;
    for (int k = 1; k <= modes_; ++k) {
      x.segment(n_ * k, n_) = o.a[k - 1];
      x.segment(n_ * (modes_ + k), n_) = o.b[k - 1];
    }
    x[lambda_index()] = o.lambda;
    return x;
  }

  FourierOrbit unpack(const Vector& x) const {
    FourierOrbit o = zero_orbit(x.segment(0, n_), modes_, x[lambda_index()]);
    for (int k = 1; k <= modes_; ++k) {
      o.a[k - 1] = x.segment(n_ * k, n_);
      o.b[k - 1] = x.segment(n_ * (modes_ + k), n_);
    }
    return o;
  }

  int lambda_index() const { return n_ * (2 * modes_ + 1); }

  Vector residual(const Vector& x) const {
    const double lambda = x[lambda_index()];
    const double sigma = x[lambda_index() + 1];
    Vector out = Vector::Zero(unknowns());
    Matrix field(n_, points_);
    for (int q = 0; q < points_; ++q) {
      Vector z = x.segment(0, n_);
      Vector dz = Vector::Zero(n_);
      for (int k = 1; k <= modes_; ++k) {
        const auto ak = x.segment(n_ * k, n_);
        const auto bk = x.segment(n_ * (modes_ + k), n_);
        z += ak * cos_(q, k) + bk * sin_(q, k);
        dz += k * (bk * cos_(q, k) - ak * sin_(q, k));
      }
      const Vector g = gradient_of(system_, z);
      Vector f = dz - lambda * (j_ * g) - sigma * g;
      for (std::size_t i = 0; i < momenta_.size(); ++i) {
        f -= x[lambda_index() + 2 + static_cast<Eigen::Index>(i)] * (momenta_[i] * z);
      }
      field.col(q) = f;
    }
    // Discrete Fourier projection onto the retained modes.
    out.segment(0, n_) = field.rowwise().sum() / points_;
    for (int k = 1; k <= modes_; ++k) {
      out.segment(n_ * k, n_) = (2.0 / points_) * field * cos_.col(k);
      out.segment(n_ * (modes_ + k), n_) = (2.0 / points_) * field * sin_.col(k);
    }
    // Amplitude pinning on the Sobolev norm, scaled to be O(1) in s.
    const Vector d0 = x.segment(0, n_) - z0_;
    double norm2 = kTwoPi * d0.squaredNorm();
    double phase = 0.0;
    for (int k = 1; k <= modes_; ++k) {
      norm2 += std::numbers::pi * k *
               (x.segment(n_ * k, n_).squaredNorm() + x.segment(n_ * (modes_ + k), n_).squaredNorm());
    }
    // Time-phase condition against the shifted predictor (b, -a) of mode 1.
    phase = std::numbers::pi * (x.segment(n_, n_).dot(pin_b_) - x.segment(n_ * (modes_ + 1), n_).dot(pin_a_));
    const int row = lambda_index();
    out[row] = (norm2 - amplitude_ * amplitude_) / (2.0 * amplitude_);
    out[row + 1] = phase;
    for (std::size_t i = 0; i < tangents_.size(); ++i) {
      out[row + 2 + static_cast<Eigen::Index>(i)] = d0.dot(tangents_[i]);
    }
    return out;
  }

  Matrix jacobian(const Vector& x, const Vector& fx, double step) const {
    const int m = unknowns();
    Matrix jac(m, m);
    Vector probe = x;
    for (int i = 0; i < m; ++i) {
      const double h = step * (1.0 + std::abs(x[i]));
      probe[i] = x[i] + h;
      jac.col(i) = (residual(probe) - fx) / h;
      probe[i] = x[i];
    }
    return jac;
  }

 private:
  const HamiltonianSystem& system_;
  Vector z0_;
  int n_;
  int modes_;
  int points_;
  Matrix j_;
  Vector pin_a_;
  Vector pin_b_;
  double amplitude_;
  std::vector<Matrix> momenta_;
  std::vector<Vector> tangents_;
  Matrix cos_;
  Matrix sin_;
};

double tail_fraction(const FourierOrbit& o) {
  double total = 0.0;
  double tail = 0.0;
  for (int k = 1; k <= o.modes(); ++k) {
    const double e = o.mode_energy(k);
    total += e;
    if (k > 1 && 2 * k > o.modes()) tail += e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

int dominant_mode(const FourierOrbit& o) {
  int best = 1;
  for (int k = 2; k <= o.modes(); ++k) {
    if (o.mode_energy(k) > o.mode_energy(best)) best = k;
  }
  return best;
}

struct NewtonOutcome {
  FourierOrbit orbit;
  bool converged = false;
  int iterations = 0;
};

NewtonOutcome newton(const HarmonicBalance& hb, const FourierOrbit& guess, const OrbitSolverOptions& options) {
  Vector x = hb.pack(guess);
  NewtonOutcome out;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Vector fx = hb.residual(x);
    if (!fx.allFinite()) break;
    const Matrix jac = hb.jacobian(x, fx, options.fd_step);
    Eigen::PartialPivLU<Matrix> lu(jac);
    const Vector dx = lu.solve(-fx);
    if (!dx.allFinite()) break;
    x += dx;
    out.iterations = it + 1;
    if (dx.lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
      out.converged = true;
      break;
    }
  }
  out.orbit = hb.unpack(x);
  return out;
}

}  // namespace

double FourierOrbit::period() const { return kTwoPi * lambda; }

Vector FourierOrbit::value(double t) const {
  Vector z = a0;
  for (int k = 1; k <= modes(); ++k) z += a[k - 1] * std::cos(k * t) + b[k - 1] * std::sin(k * t);
  return z;
}

Vector FourierOrbit::derivative(double t) const {
  Vector dz = Vector::Zero(dim());
  for (int k = 1; k <= modes(); ++k) dz += k * (b[k - 1] * std::cos(k * t) - a[k - 1] * std::sin(k * t));
  return dz;
}

double FourierOrbit::mode_energy(int k) const {
  return a[k - 1].squaredNorm() + b[k - 1].squaredNorm();
}

double sobolev_norm(const FourierOrbit& orbit, const Vector& z0) {
  double s = kTwoPi * (orbit.a0 - z0).squaredNorm();
  for (int k = 1; k <= orbit.modes(); ++k) s += std::numbers::pi * k * orbit.mode_energy(k);
  return std::sqrt(s);
}

double sup_distance(const FourierOrbit& orbit, const Vector& z0, int points) {
  double best = 0.0;
  for (const double t : grid(points)) best = std::max(best, (orbit.value(t) - z0).norm());
  return best;
}

std::vector<Vector> residual_field(const HamiltonianSystem& system, const FourierOrbit& orbit, int points) {
  const Matrix j = standard_symplectic(system.half_dim);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(points));
  for (const double t : grid(points)) {
    out.push_back(orbit.derivative(t) - orbit.lambda * (j * gradient_of(system, orbit.value(t))));
  }
  return out;
}

double max_residual(const HamiltonianSystem& system, const FourierOrbit& orbit, int points) {
  double best = 0.0;
  for (const auto& r : residual_field(system, orbit, points)) best = std::max(best, r.norm());
  return best;
}

double energy_variation(const HamiltonianSystem& system, const FourierOrbit& orbit, int points) {
  std::vector<double> values;
  for (const double t : grid(points)) values.push_back(system.energy(orbit.value(t)));
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double worst = 0.0;
  for (const double v : values) worst = std::max(worst, std::abs(v - mean));
  return mean != 0.0 ? worst / std::abs(mean) : worst;
}

FourierOrbit transform_orbit(const FourierOrbit& orbit, const Matrix& gamma, double theta) {
  FourierOrbit out = orbit;
  const bool act = gamma.size() > 0;
  if (act) out.a0 = gamma * orbit.a0;
  for (int k = 1; k <= orbit.modes(); ++k) {
    const double c = std::cos(k * theta);
    const double s = std::sin(k * theta);
    Vector ak = orbit.a[k - 1] * c + orbit.b[k - 1] * s;
    Vector bk = orbit.b[k - 1] * c - orbit.a[k - 1] * s;
    out.a[k - 1] = act ? Vector(gamma * ak) : ak;
    out.b[k - 1] = act ? Vector(gamma * bk) : bk;
  }
  return out;
}

KernelDirection kernel_direction(const HamiltonianSystem& system, const EquilibriumOrbit& eq,
                                 const BifurcationCandidate& candidate) {
  const Matrix a = hessian_of(system, eq.z0);
  const Matrix t = t_matrix(0.5 * (a + a.transpose()), 1, candidate.lambda0);
  Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const Eigen::Index last = sv.size() - 1;
  if (sv[last] > 1e-6) {
    throw Error(ErrorCode::EmptyKernel, fmt::format("T_1 at lambda0 has smallest singular value {:.3e}", sv[last]));
  }
  KernelDirection out;
  out.singular_value = sv[last];
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] <= 1e-6) ++out.kernel_dim;
  }
  const Vector v = svd.matrixV().col(last);
  const auto n = a.rows();
  out.a1 = v.head(n);
  out.b1 = v.tail(n);
  return out;
}

FourierOrbit solve_orbit(const HamiltonianSystem& system, const EquilibriumOrbit& eq,
                         const BifurcationCandidate& candidate, double amplitude, const OrbitSolverOptions& options,
                         const std::optional<FourierOrbit>& initial_guess) {
  if (!(amplitude > 0.0)) throw Error(ErrorCode::InvalidArgument, "amplitude must be positive");
  if (options.modes < 1 || options.max_modes < options.modes) {
    throw Error(ErrorCode::InvalidArgument, "invalid mode counts");
  }
  const KernelDirection dir = kernel_direction(system, eq, candidate);
  // Predictor normalised to unit Sobolev norm: pi (|a1|^2 + |b1|^2) = 1.
  const double scale = 1.0 / std::sqrt(std::numbers::pi * (dir.a1.squaredNorm() + dir.b1.squaredNorm()));
  const Vector pin_a = dir.a1 * scale;
  const Vector pin_b = dir.b1 * scale;
  const double tol = options.tolerance > 0.0 ? options.tolerance : 1e-9 * (1.0 + eq.z0.norm());

  FourierOrbit guess;
  if (initial_guess) {
    guess = *initial_guess;
  } else {
    guess = zero_orbit(eq.z0, options.modes, candidate.lambda0);
    guess.a[0] = amplitude * pin_a;
    guess.b[0] = amplitude * pin_b;
  }
  int modes = std::max(options.modes, guess.modes());
  modes = std::min(modes, options.max_modes);
  guess = resized(guess, modes);

  while (true) {
    const HarmonicBalance hb(system, eq, pin_a, pin_b, amplitude, modes);
    NewtonOutcome step = newton(hb, guess, options);
    FourierOrbit orbit = std::move(step.orbit);
    orbit.residual = max_residual(system, orbit, 4 * modes + 1);
    orbit.amplitude = sobolev_norm(orbit, eq.z0);
    const bool resolved = tail_fraction(orbit) <= kTailEnergyRel;
    if (step.converged && orbit.residual < tol && resolved) {
      if (dominant_mode(orbit) != 1) {
        throw Error(ErrorCode::WrongBranch,
                    fmt::format("dominant mode of the solution is k = {}, not 1", dominant_mode(orbit)));
      }
      return orbit;
    }
    if (modes >= options.max_modes || !orbit.a0.allFinite()) {
      throw Error(ErrorCode::NoConvergence,
                  fmt::format("harmonic balance failed at amplitude {:.3e} with {} modes (residual {:.3e})",
                              amplitude, modes, orbit.residual));
    }
    // Retry with twice the modes, warm-started from the current iterate
    // when it is usable.
    const bool usable = step.converged && orbit.a0.allFinite();
    guess = resized(usable ? orbit : guess, std::min(2 * modes, options.max_modes));
    modes = guess.modes();
  }
}

Branch continue_branch(const HamiltonianSystem& system, const EquilibriumOrbit& eq,
                       const BifurcationCandidate& candidate, const BranchOptions& options) {
  if (options.steps < 1 || !(options.s0 > 0.0) || !(options.growth > 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "branch needs steps >= 1, s0 > 0 and growth > 1");
  }
  Branch branch;
  branch.candidate = candidate;
  branch.z0 = eq.z0;
  std::optional<FourierOrbit> guess;
  double s_prev = 0.0;
  for (int i = 0; i < options.steps; ++i) {
    const double s = options.s0 * std::pow(options.growth, i);
    if (guess) {
      // Scale the deviation from z0 and extrapolate lambda quadratically in s.
      const double r = s / s_prev;
      FourierOrbit g = *guess;
      g.a0 = eq.z0 + (g.a0 - eq.z0) * r * r;
      for (int k = 1; k <= g.modes(); ++k) {
        g.a[k - 1] *= r;
        g.b[k - 1] *= r;
      }
      g.lambda = candidate.lambda0 + (guess->lambda - candidate.lambda0) * r * r;
      guess = std::move(g);
    }
    try {
      FourierOrbit orbit = solve_orbit(system, eq, candidate, s, options.solver, guess);
      branch.period_trend.emplace_back(orbit.amplitude, orbit.period());
      branch.sup_distance_trend.emplace_back(orbit.amplitude, sup_distance(orbit, eq.z0, 8 * orbit.modes() + 1));
      guess = orbit;
      branch.orbits.push_back(std::move(orbit));
      s_prev = s;
    } catch (const Error& e) {
      branch.failure = fmt::format("step {} (s = {:.3e}): {}", i, s, e.what());
      break;
    }
  }
  // Branch invariants.
  if (!branch.orbits.empty() && branch.orbits.front().amplitude > options.s0 * (1.0 + 1e-9)) {
    branch.issues.push_back("first amplitude exceeds s0");
  }
  for (std::size_t i = 1; i < branch.orbits.size(); ++i) {
    if (!(branch.orbits[i].amplitude > branch.orbits[i - 1].amplitude)) {
      branch.issues.push_back(fmt::format("amplitude not increasing at step {}", i));
    }
    if (!(branch.sup_distance_trend[i].second > branch.sup_distance_trend[i - 1].second)) {
      branch.issues.push_back(fmt::format("sup distance not increasing at step {}", i));
    }
  }
  return branch;
}

std::string_view to_string(PeriodClass c) {
  switch (c) {
    case PeriodClass::Minimal: return "minimal";
    case PeriodClass::Subharmonic: return "subharmonic";
    case PeriodClass::Undetermined: return "undetermined";
  }
  return "undetermined";
}

PeriodClass minimal_period_check(const FourierOrbit& orbit) {
  const int points = 4 * orbit.modes() + 1;
  double size = orbit.amplitude;
  if (size <= 0.0) {
    for (int k = 1; k <= orbit.modes(); ++k) size += std::numbers::pi * k * orbit.mode_energy(k);
    size = std::sqrt(size);
  }
  const double threshold = 1e-6 * size;
  const auto times = grid(points);
  for (int r = 2; r <= 5; ++r) {
    const double shift = kTwoPi / r;
    const bool periodic = std::all_of(times.begin(), times.end(), [&](double t) {
      return (orbit.value(t + shift) - orbit.value(t)).norm() <= threshold;
    });
    if (periodic) return PeriodClass::Subharmonic;
  }
  const double e1 = orbit.modes() >= 1 ? orbit.mode_energy(1) : 0.0;
  for (int k = 2; k <= orbit.modes(); ++k) {
    if (!(e1 > 100.0 * orbit.mode_energy(k))) return PeriodClass::Undetermined;
  }
  return e1 > 0.0 ? PeriodClass::Minimal : PeriodClass::Undetermined;
}

}  // namespace hambif
