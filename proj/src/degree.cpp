#include "hambif/degree.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "hambif/error.hpp"

namespace hambif {

namespace {

constexpr double kNonsingularTol = 1e-8;
constexpr double kBoundaryZeroTol = 1e-10;
constexpr int kNewtonIterations = 60;

// Radical inverse in the given prime base (Halton sequence coordinate).
double radical_inverse(unsigned index, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * (index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43,
                                47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107};

std::vector<Vector> sphere_samples(int dim, double radius, int count, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Vector v(dim);
    for (int k = 0; k < dim; ++k) v[k] = normal(rng);
    const double n = v.norm();
    if (n == 0.0) continue;
    out.push_back(radius * v / n);
  }
  return out;
}

double boundary_infimum(const SectionMap& map, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  double inf = std::numeric_limits<double>::infinity();
  for (const auto& u : sphere_samples(map.dim, map.radius, 64 * map.dim, rng)) {
    inf = std::min(inf, map.evaluator(u).norm());
  }
  return inf;
}

// Signed count of preimages of a random small target for one seed.
int regular_value_count(const SectionMap& map, double boundary_inf, std::uint64_t seed) {
  const int dim = map.dim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Vector target(dim);
  for (int k = 0; k < dim; ++k) target[k] = normal(rng);
  target *= (0.02 + 0.03 * uniform(rng)) * boundary_inf / target.norm();

  // Cranley-Patterson shifted Halton points inside the ball.
  Vector shift(dim);
  for (int k = 0; k < dim; ++k) shift[k] = uniform(rng);
  const int wanted = 40 + 40 * dim;
  std::vector<Vector> starts;
  for (unsigned idx = 1; static_cast<int>(starts.size()) < wanted && idx < 200000; ++idx) {
    Vector u(dim);
    for (int k = 0; k < dim; ++k) {
      const double h = radical_inverse(idx, kPrimes[k % std::size(kPrimes)]) + shift[k];
      u[k] = 2.0 * (h - std::floor(h)) - 1.0;
    }
    if (u.norm() < 1.0) starts.push_back(map.radius * u);
  }

  const double step = 1e-7 * map.radius;
  const double tol = 1e-12 * std::max(boundary_inf, 1e-300) + 1e-15;
  std::vector<Vector> roots;
  std::vector<int> signs;
  for (Vector u : starts) {
    bool converged = false;
    for (int it = 0; it < kNewtonIterations; ++it) {
      const Vector r = map.evaluator(u) - target;
      if (r.norm() <= tol) {
        converged = true;
        break;
      }
      const Matrix jac = section_jacobian(map, u, step);
      Eigen::FullPivLU<Matrix> lu(jac);
      if (!lu.isInvertible()) break;
      Vector du = lu.solve(-r);
      // Damp steps that would leave the ball by a wide margin.
      const double limit = 0.5 * map.radius;
      if (du.norm() > limit) du *= limit / du.norm();
      u += du;
      if (!u.allFinite() || u.norm() > 2.0 * map.radius) break;
    }
    if (!converged || u.norm() >= map.radius) continue;
    const bool seen = std::any_of(roots.begin(), roots.end(),
                                  [&](const Vector& v) { return (v - u).norm() <= 1e-6 * map.radius; });
    if (seen) continue;
    const double det = section_jacobian(map, u, step).determinant();
    if (det == 0.0) throw Error(ErrorCode::Unreliable, "target is not a regular value");
    roots.push_back(u);
    signs.push_back(det > 0.0 ? 1 : -1);
  }
  // Sum in a canonical order so the result is independent of start order.
  std::vector<std::size_t> order(roots.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(roots[a].data(), roots[a].data() + dim, roots[b].data(),
                                        roots[b].data() + dim);
  });
  int degree = 0;
  for (const auto i : order) degree += signs[i];
  return degree;
}

}  // namespace

std::string_view to_string(DegreePath path) {
  switch (path) {
    case DegreePath::Nondegenerate: return "nondegenerate";
    case DegreePath::Minimum: return "minimum";
    case DegreePath::RegularValue: return "regular-value";
    case DegreePath::None: return "none";
  }
  return "none";
}

SectionMap section_map(const HamiltonianSystem& system, const EquilibriumOrbit& eq, double radius) {
  SectionMap map;
  map.dim = static_cast<int>(eq.section_basis.cols());
  map.radius = radius;
  const Matrix basis = eq.section_basis;
  const Vector z0 = eq.z0;
  map.evaluator = [&system, basis, z0](const Vector& u) -> Vector {
    return basis.transpose() * gradient_of(system, z0 + basis * u);
  };
  map.energy = [&system, basis, z0](const Vector& u) { return system.energy(z0 + basis * u); };
  return map;
}

Matrix section_jacobian(const SectionMap& map, const Vector& u, double step) {
  Matrix jac(map.dim, map.dim);
  Vector probe = u;
  for (int k = 0; k < map.dim; ++k) {
    probe[k] = u[k] + step;
    const Vector fp = map.evaluator(probe);
    probe[k] = u[k] - step;
    const Vector fm = map.evaluator(probe);
    probe[k] = u[k];
    jac.col(k) = (fp - fm) / (2.0 * step);
  }
  return jac;
}

int degree_nondegenerate(const SectionMap& map, const Matrix& jac) {
  if (jac.rows() != map.dim || jac.cols() != map.dim) {
    throw Error(ErrorCode::InvalidArgument, "Jacobian does not match the section dimension");
  }
  if (map.dim == 0) return 1;
  if (min_singular_value(jac) <= kNonsingularTol) {
    throw Error(ErrorCode::Degenerate, "section Jacobian is singular");
  }
  return jac.determinant() > 0.0 ? 1 : -1;
}

int degree_minimum(const SectionMap& map) {
  if (map.dim == 0) return 1;
  const Vector origin = Vector::Zero(map.dim);
  const Matrix jac = section_jacobian(map, origin, 1e-6 * map.radius);
  const Matrix sym = 0.5 * (jac + jac.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -zero_threshold(sym)) {
    throw Error(ErrorCode::NotAMinimum, "compressed Hessian has a negative eigenvalue");
  }
  std::mt19937_64 rng(0x5eedULL);
  const double e0 = map.energy ? map.energy(origin) : 0.0;
  for (const auto& u : sphere_samples(map.dim, map.radius, 32 * map.dim, rng)) {
    if (map.evaluator(u).norm() < kBoundaryZeroTol) {
      throw Error(ErrorCode::NotAMinimum, "section field vanishes on the probe sphere");
    }
    if (map.energy && !(map.energy(u) > e0)) {
      throw Error(ErrorCode::NotAMinimum, "energy does not increase on the probe sphere");
    }
  }
  return 1;
}

int degree_regular_value(const SectionMap& map, int attempts, std::uint64_t seed) {
  if (attempts < 1) throw Error(ErrorCode::InvalidArgument, "attempts must be >= 1");
  if (map.dim == 0) return 1;
  const double inf = boundary_infimum(map, seed);
  if (inf < kBoundaryZeroTol) throw Error(ErrorCode::BoundaryZero, "section field vanishes on the boundary sphere");
  std::optional<int> first;
  for (int a = 0; a < attempts; ++a) {
    const int d = regular_value_count(map, inf, seed + static_cast<std::uint64_t>(a) * 7919ULL);
    if (first && *first != d) {
      throw Error(ErrorCode::Unreliable, fmt::format("seeds disagree ({} vs {})", *first, d));
    }
    first = d;
  }
  return *first;
}

DegreeReport section_degree(const HamiltonianSystem& system, const EquilibriumOrbit& eq, std::uint64_t seed) {
  DegreeReport report;
  const int dim = static_cast<int>(eq.section_basis.cols());
  if (dim == 0) {
    report.value = 1;
    report.path = DegreePath::Nondegenerate;
    report.note = "empty section";
    return report;
  }
  const Matrix& b = eq.section_basis;
  const Matrix jac = b.transpose() * hessian_of(system, eq.z0) * b;
  double radius = 1e-2 * (1.0 + eq.z0.norm());

  SectionMap map = section_map(system, eq, radius);
  try {
    report.value = degree_nondegenerate(map, jac);
    report.path = DegreePath::Nondegenerate;
    report.radius = radius;
    return report;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Degenerate) throw;
  }

  for (int shrink = 0; shrink <= 10; ++shrink, radius *= 0.5) {
    map.radius = radius;
    try {
      report.value = degree_minimum(map);
      report.path = DegreePath::Minimum;
      report.radius = radius;
      return report;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotAMinimum) throw;
    }
    try {
      report.value = degree_regular_value(map, 3, seed);
      report.path = DegreePath::RegularValue;
      report.heuristic = true;
      report.radius = radius;
      report.note = "heuristic: preimage completeness not certified";
      return report;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::BoundaryZero) continue;
      if (e.code() == ErrorCode::Unreliable) {
        report.note = e.what();
        report.path = DegreePath::None;
        return report;
      }
      throw;
    }
  }
  report.note = "boundary zeros persisted after shrinking the ball 10 times";
  return report;
}

}  // namespace hambif
