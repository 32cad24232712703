#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "hambif/linalg.hpp"
#include "hambif/model.hpp"

namespace hambif {

/// Gradient of H compressed to the orthogonal section through z0:
/// u -> B^T grad H(z0 + B u) on the ball |u| < radius.
struct SectionMap {
  int dim = 0;
  std::function<Vector(const Vector&)> evaluator;
  double radius = 1e-2;
  /// Optional u -> H(z0 + B u), used to certify minima.
  std::function<double(const Vector&)> energy;
};

SectionMap section_map(const HamiltonianSystem& system, const EquilibriumOrbit& eq, double radius);

/// Sign of det(jac); jac must be nonsingular (smallest singular value above 1e-8).
int degree_nondegenerate(const SectionMap& map, const Matrix& jac);

/// +1 once the origin is certified an isolated local minimum: compressed
/// Hessian positive semidefinite and the field and energy increase checked
/// on a probe sphere. Throws NotAMinimum otherwise.
int degree_minimum(const SectionMap& map);

/// Heuristic degree: counts signed preimages of a small random regular value
/// found by multi-start Newton. Runs `attempts` independent seeds starting at
/// `seed` and throws Unreliable if they disagree, BoundaryZero if the field
/// vanishes on the sampled boundary sphere.
int degree_regular_value(const SectionMap& map, int attempts, std::uint64_t seed = 1);

/// Central-difference Jacobian of the section field.
Matrix section_jacobian(const SectionMap& map, const Vector& u, double step);

enum class DegreePath { Nondegenerate, Minimum, RegularValue, None };

std::string_view to_string(DegreePath path);

struct DegreeReport {
  std::optional<int> value;
  DegreePath path = DegreePath::None;
  bool heuristic = false;
  double radius = 0.0;
  std::string note;
};

/// Degree of the section gradient at z0: nondegenerate, then minimum, then
/// regular-value path. The ball radius starts at 1e-2 (1 + |z0|) and is
/// halved (up to 10 times) when boundary zeros are detected.
DegreeReport section_degree(const HamiltonianSystem& system, const EquilibriumOrbit& eq, std::uint64_t seed = 1);

}  // namespace hambif
