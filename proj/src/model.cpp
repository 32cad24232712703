#include "hambif/model.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "hambif/error.hpp"

namespace hambif {

namespace {

constexpr int kMaxNewtonIterations = 50;

double safe_energy(const EnergyFn& energy, const Vector& z) {
  try {
    return energy(z);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::EvaluationFailure, e.what());
  }
}

Vector random_probe(const HamiltonianSystem& system, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, system.probe_spread);
  Vector z = system.probe_center.size() == system.dim() ? system.probe_center : Vector::Zero(system.dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] += normal(rng);
  return z;
}

std::vector<double> random_times(const SymmetryGroup& group, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<double> times(group.generators.size());
  for (auto& t : times) t = uniform(rng);
  return times;
}

}  // namespace

Matrix SymmetryGroup::element(const std::vector<double>& times) const {
  if (times.size() != generators.size()) {
    throw Error(ErrorCode::InvalidArgument, "one time per generator required");
  }
  if (generators.empty()) return Matrix();
  Matrix sum = Matrix::Zero(generators.front().rows(), generators.front().cols());
  for (std::size_t i = 0; i < generators.size(); ++i) sum += times[i] * generators[i];
  return sum.exp();
}

double SymmetryGroup::validity_defect(int half_dim) const {
  const Matrix j = standard_symplectic(half_dim);
  double defect = 0.0;
  for (const auto& x : generators) {
    if (x.rows() != j.rows() || x.cols() != j.cols()) {
      throw Error(ErrorCode::InvalidArgument, "generator has wrong dimension");
    }
    defect = std::max(defect, (x.transpose() + x).cwiseAbs().maxCoeff());
    defect = std::max(defect, (x * j - j * x).cwiseAbs().maxCoeff());
  }
  return defect;
}

Vector fd_gradient(const EnergyFn& energy, const Vector& z, double eps) {
  Vector g(z.size());
  Vector probe = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double h = eps * (1.0 + std::abs(z[i]));
    probe[i] = z[i] + h;
    const double fp = safe_energy(energy, probe);
    probe[i] = z[i] - h;
    const double fm = safe_energy(energy, probe);
    probe[i] = z[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Matrix fd_hessian(const EnergyFn& energy, const Vector& z, double eps) {
  const Eigen::Index n = z.size();
  Matrix h(n, n);
  Vector steps(n);
  for (Eigen::Index i = 0; i < n; ++i) steps[i] = eps * (1.0 + std::abs(z[i]));
  const double f0 = safe_energy(energy, z);
  Vector probe = z;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      if (i == j) {
        probe[i] = z[i] + steps[i];
        const double fp = safe_energy(energy, probe);
        probe[i] = z[i] - steps[i];
        const double fm = safe_energy(energy, probe);
        probe[i] = z[i];
        h(i, i) = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
        continue;
      }
      double acc = 0.0;
      for (const int si : {1, -1}) {
        for (const int sj : {1, -1}) {
          probe[i] = z[i] + si * steps[i];
          probe[j] = z[j] + sj * steps[j];
          acc += si * sj * safe_energy(energy, probe);
        }
      }
      probe[i] = z[i];
      probe[j] = z[j];
      h(i, j) = acc / (4.0 * steps[i] * steps[j]);
      h(j, i) = h(i, j);
    }
  }
  return 0.5 * (h + h.transpose());
}

Vector gradient_of(const HamiltonianSystem& system, const Vector& z) {
  if (z.size() != system.dim()) throw Error(ErrorCode::InvalidArgument, "point has wrong dimension");
  if (system.gradient) {
    try {
      return (*system.gradient)(z);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::EvaluationFailure, e.what());
    }
  }
  return fd_gradient(system.energy, z);
}

Matrix hessian_of(const HamiltonianSystem& system, const Vector& z) {
  if (z.size() != system.dim()) throw Error(ErrorCode::InvalidArgument, "point has wrong dimension");
  if (system.hessian) {
    try {
      return (*system.hessian)(z);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::EvaluationFailure, e.what());
    }
  }
  return fd_hessian(system.energy, z);
}

InvarianceReport invariance_check(const HamiltonianSystem& system, int samples, std::uint64_t seed) {
  InvarianceReport report;
  if (system.symmetry.trivial()) return report;
  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vector z = random_probe(system, rng);
    const Matrix gamma = system.symmetry.element(random_times(system.symmetry, rng));
    const double h = safe_energy(system.energy, z);
    const double hg = safe_energy(system.energy, gamma * z);
    const double violation = std::abs(hg - h) / (1.0 + std::abs(h));
    report.max_violation = std::max(report.max_violation, violation);
    ++report.samples;
  }
  report.passed = report.max_violation < 1e-8;
  return report;
}

double gradient_equivariance_defect(const HamiltonianSystem& system, int samples, std::uint64_t seed) {
  if (system.symmetry.trivial()) return 0.0;
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector z = random_probe(system, rng);
    const Matrix gamma = system.symmetry.element(random_times(system.symmetry, rng));
    const Vector lhs = gradient_of(system, gamma * z);
    const Vector rhs = gamma * gradient_of(system, z);
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

EquilibriumOrbit orbit_geometry(const HamiltonianSystem& system, const Vector& z) {
  std::vector<Vector> tangents;
  tangents.reserve(system.symmetry.generators.size());
  for (const auto& x : system.symmetry.generators) tangents.emplace_back(x * z);
  EquilibriumOrbit eq;
  eq.z0 = z;
  eq.tangent_basis = orthonormal_span(tangents, system.dim());
  eq.orbit_dim = static_cast<int>(eq.tangent_basis.cols());
  if (eq.orbit_dim == 0) {
    eq.section_basis = Matrix::Identity(system.dim(), system.dim());
  } else {
    std::vector<Vector> cols;
    for (int i = 0; i < eq.orbit_dim; ++i) cols.emplace_back(eq.tangent_basis.col(i));
    eq.section_basis = orthogonal_complement(cols, system.dim());
  }
  eq.gradient_norm = gradient_of(system, z).norm();
  return eq;
}

EquilibriumOrbit refine_equilibrium(const HamiltonianSystem& system, const Vector& guess) {
  if (guess.size() != system.dim()) throw Error(ErrorCode::InvalidArgument, "guess has wrong dimension");
  auto newton_step = [&system](const Vector& z, const Vector& g) -> Vector {
    const EquilibriumOrbit geo = orbit_geometry(system, z);
    const Matrix& b = geo.section_basis;
    const Matrix hs = b.transpose() * hessian_of(system, z) * b;
    Eigen::JacobiSVD<Matrix> svd(hs, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv.size() > 0 && sv[sv.size() - 1] <= 1e-12 * (1.0 + sv[0])) {
      throw Error(ErrorCode::DegenerateSection, "section-restricted Hessian is singular");
    }
    return b * svd.solve(-(b.transpose() * g));
  };
  Vector z = guess;
  for (int it = 0; it <= kMaxNewtonIterations; ++it) {
    Vector g = gradient_of(system, z);
    if (!g.allFinite()) throw Error(ErrorCode::EvaluationFailure, "gradient is not finite");
    if (g.norm() < 1e-10 * (1.0 + z.norm())) {
      // Polish while the gradient keeps shrinking; the tolerance above is
      // loose for weakly curved potentials.
      for (int polish = 0; polish < 5 && g.norm() > 0.0; ++polish) {
        const Vector trial = z + newton_step(z, g);
        const Vector gt = gradient_of(system, trial);
        if (!(gt.norm() < g.norm())) break;
        z = trial;
        g = gt;
      }
      EquilibriumOrbit eq = orbit_geometry(system, z);
      eq.iterations = it;
      return eq;
    }
    if (it == kMaxNewtonIterations) break;
    z += newton_step(z, g);
  }
  throw Error(ErrorCode::NoConvergence, "equilibrium Newton did not converge in 50 iterations");
}

HamiltonianSystem newtonian_to_hamiltonian(const NewtonianPotential& potential) {
  const int n = potential.dim;
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "potential dimension must be >= 1");
  HamiltonianSystem sys;
  sys.half_dim = n;
  sys.name = potential.name;
  auto u = potential.potential;
  sys.energy = [u, n](const Vector& z) {
    const Vector q = z.head(n);
    return 0.5 * z.tail(n).squaredNorm() + u(q);
  };
  if (potential.gradient) {
    auto gu = *potential.gradient;
    sys.gradient = [gu, n](const Vector& z) {
      Vector g(2 * n);
      g.head(n) = gu(z.head(n));
      g.tail(n) = z.tail(n);
      return g;
    };
  } else {
    sys.gradient = [u, n](const Vector& z) {
      Vector g(2 * n);
      g.head(n) = fd_gradient(u, z.head(n));
      g.tail(n) = z.tail(n);
      return g;
    };
  }
  if (potential.hessian) {
    auto hu = *potential.hessian;
    sys.hessian = [hu, n](const Vector& z) {
      Matrix h = Matrix::Zero(2 * n, 2 * n);
      h.topLeftCorner(n, n) = hu(z.head(n));
      h.bottomRightCorner(n, n).setIdentity();
      return h;
    };
  } else {
    sys.hessian = [u, n](const Vector& z) {
      Matrix h = Matrix::Zero(2 * n, 2 * n);
      h.topLeftCorner(n, n) = fd_hessian(u, z.head(n));
      h.bottomRightCorner(n, n).setIdentity();
      return h;
    };
  }
  for (const auto& x : potential.generators) {
    if (x.rows() != n || x.cols() != n) throw Error(ErrorCode::InvalidArgument, "generator has wrong dimension");
    Matrix lifted = Matrix::Zero(2 * n, 2 * n);
    lifted.topLeftCorner(n, n) = x;
    lifted.bottomRightCorner(n, n) = x;
    sys.symmetry.generators.push_back(std::move(lifted));
  }
  sys.probe_center = Vector::Zero(2 * n);
  return sys;
}

double satellite_equilibrium_distance(double omega, double c) {
  if (!(omega > 0.0) || !(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "omega and c must be positive");
  const double w2 = omega * omega;
  auto f = [&](double d) { return w2 * std::pow(d, 5) - d * d - 3.0 * c; };
  auto df = [&](double d) { return 5.0 * w2 * std::pow(d, 4) - 2.0 * d; };
  // f(0) = -3c < 0 and f -> +inf, so expand the upper end until the sign flips.
  double lo = 0.0;
  double hi = 1.0;
  while (f(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && (hi - lo) > 1e-10 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  double d = 0.5 * (lo + hi);
  for (int i = 0; i < 20; ++i) {
    const double step = f(d) / df(d);
    d -= step;
    if (std::abs(step) <= 1e-16 * d) break;
  }
  return d;
}

}  // namespace hambif
