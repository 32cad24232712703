#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hambif/analysis.hpp"
#include "hambif/error.hpp"
#include "hambif/orbit.hpp"
#include "support.hpp"

using namespace hambif;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Setup {
  HamiltonianSystem system;
  EquilibriumOrbit eq;
  AnalysisReport report;
};

Setup setup(const std::string& name, const PresetParams& params) {
  Setup s;
  s.system = preset(name, params);
  s.eq = refine_equilibrium(s.system, preset_guess(name, params));
  s.report = analyze(s.system, s.eq);
  return s;
}

FourierOrbit circle(double radius) {
  // z(t) = r (cos t, -sin t) solves q' = p, p' = -q.
  FourierOrbit o;
  o.a0 = Vector::Zero(2);
  o.a = {Vector::Zero(2)};
  o.b = {Vector::Zero(2)};
  o.a[0] << radius, 0.0;
  o.b[0] << 0.0, -radius;
  o.lambda = 1.0;
  return o;
}

}  // namespace

TEST_CASE("residual field") {
  const auto h = preset("harmonic", {{"beta", 1.0}});
  FourierOrbit constant;
  constant.a0 = Vector::Zero(2);
  constant.a.assign(3, Vector::Zero(2));
  constant.b.assign(3, Vector::Zero(2));
  constant.lambda = 0.37;
  CHECK(max_residual(h, constant, 17) == 0.0);

  CHECK(max_residual(h, circle(0.3), 33) < 1e-12);
  auto wrong = circle(0.3);
  wrong.lambda = 1.1;
  CHECK(max_residual(h, wrong, 33) > 1e-3);
  CHECK(residual_field(h, circle(0.3), 9).size() == 9);
}

TEST_CASE("norms and sampling") {
  const auto c = circle(0.5);
  // pi * (|a1|^2 + |b1|^2) = pi * 0.5
  CHECK(sobolev_norm(c, Vector::Zero(2)) == doctest::Approx(std::sqrt(std::numbers::pi * 0.5)));
  CHECK(sup_distance(c, Vector::Zero(2), 64) == doctest::Approx(0.5));
  CHECK(c.period() == doctest::Approx(kTwoPi));
  CHECK((c.value(0.0) - Vector::Unit(2, 0) * 0.5).norm() < 1e-15);
  CHECK((c.derivative(0.0) - Vector::Unit(2, 1) * -0.5).norm() < 1e-15);
}

TEST_CASE("minimal period classification") {
  CHECK(minimal_period_check(circle(0.2)) == PeriodClass::Minimal);

  FourierOrbit mode2;
  mode2.a0 = Vector::Zero(2);
  mode2.a = {Vector::Zero(2), Vector::Unit(2, 0)};
  mode2.b = {Vector::Zero(2), Vector::Zero(2)};
  CHECK(minimal_period_check(mode2) == PeriodClass::Subharmonic);

  // Dominant k = 1 with small harmonics: energies 1 vs 1e-4 and 4e-6.
  FourierOrbit mixed = circle(1.0 / std::sqrt(2.0));
  mixed.a.push_back(Vector::Unit(2, 0) * 1e-2);
  mixed.b.push_back(Vector::Zero(2));
  mixed.a.push_back(Vector::Zero(2));
  mixed.b.push_back(Vector::Unit(2, 1) * 2e-3);
  CHECK(minimal_period_check(mixed) == PeriodClass::Minimal);

  FourierOrbit comparable = mixed;
  comparable.a[1] = Vector::Unit(2, 0) * 0.5;
  CHECK(minimal_period_check(comparable) == PeriodClass::Undetermined);
}

TEST_CASE("kernel direction") {
  const auto s = setup("harmonic", {{"beta", 1.0}});
  const auto dir = kernel_direction(s.system, s.eq, s.report.candidates[0]);
  CHECK(dir.kernel_dim == 2);
  CHECK(dir.singular_value < 1e-12);
  const Matrix t = t_matrix(Matrix::Identity(2, 2), 1, 1.0);
  Vector v(4);
  v << dir.a1, dir.b1;
  CHECK((t * v).norm() < 1e-12);

  auto off = s.report.candidates[0];
  off.lambda0 = 0.7;
  try {
    kernel_direction(s.system, s.eq, off);
    FAIL("expected EmptyKernel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyKernel);
  }
}

TEST_CASE("harmonic orbits are exact circles") {
  const auto s = setup("harmonic", {{"beta", 1.0}});
  const auto& cand = s.report.candidates[0];
  for (double amp : {1e-4, 1e-2, 0.5}) {
    const auto o = solve_orbit(s.system, s.eq, cand, amp);
    CHECK(std::abs(o.lambda - 1.0) < 1e-12);
    CHECK(o.residual < 1e-12);
    CHECK(o.amplitude == doctest::Approx(amp).epsilon(1e-12));
    const double r = sup_distance(o, s.eq.z0, 64);
    CHECK(r == doctest::Approx(amp / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-9));
    for (int k = 2; k <= o.modes(); ++k) CHECK(o.mode_energy(k) < 1e-24);
  }
  // Linear exactness with a single mode.
  OrbitSolverOptions one;
  one.modes = 1;
  const auto o1 = solve_orbit(s.system, s.eq, cand, 0.1, one);
  CHECK(o1.modes() == 1);
  CHECK(o1.residual < 1e-12);

  // Linear exactness for another quadratic H.
  const auto springs = setup("harmonic", {{"beta", 2.5}});
  const auto o2 = solve_orbit(springs.system, springs.eq, springs.report.candidates[0], 0.2, one);
  CHECK(o2.residual < 1e-12);
  CHECK(o2.period() == doctest::Approx(kTwoPi / 2.5).epsilon(1e-12));
}

TEST_CASE("satellite orbit near the equilibrium") {
  const auto s = setup("satellite", {{"omega", 1.0}, {"c", 0.1}});
  const auto& cand = s.report.candidates[0];
  const auto o = solve_orbit(s.system, s.eq, cand, 1e-3);
  CHECK(o.residual < 1e-9);
  CHECK(max_residual(s.system, o, 4 * o.modes() + 1) < 1e-9);
  CHECK(energy_variation(s.system, o, 97) < 1e-8);
  CHECK(minimal_period_check(o) == PeriodClass::Minimal);

  // Richardson fit over s = 1e-3, 2e-3, 4e-3: deviation scales as s^2.
  std::vector<double> dev;
  for (double amp : {1e-3, 2e-3, 4e-3}) {
    dev.push_back(std::abs(solve_orbit(s.system, s.eq, cand, amp).period() - cand.predicted_period));
  }
  CHECK(dev[1] / dev[0] == doctest::Approx(4.0).epsilon(0.01));
  CHECK(dev[2] / dev[1] == doctest::Approx(4.0).epsilon(0.01));
  const double extrapolated = (4.0 * (cand.predicted_period - dev[0]) - (cand.predicted_period - dev[1])) / 3.0;
  CHECK(std::abs(extrapolated - cand.predicted_period) < 1e-9);
}

TEST_CASE("branch invariants") {
  const auto s = setup("satellite", {{"omega", 1.0}, {"c", 0.1}});
  for (const auto& cand : s.report.candidates) {
    BranchOptions opts;
    opts.steps = 6;
    const auto b = continue_branch(s.system, s.eq, cand, opts);
    REQUIRE(b.complete(6));
    CHECK(b.issues.empty());
    CHECK(b.orbits.front().amplitude <= opts.s0 * (1.0 + 1e-9));
    CHECK(std::abs(b.period_trend.front().second - cand.predicted_period) < 1e-6);
    for (std::size_t i = 1; i < b.orbits.size(); ++i) {
      CHECK(b.orbits[i].amplitude > b.orbits[i - 1].amplitude);
      CHECK(b.sup_distance_trend[i].second > b.sup_distance_trend[i - 1].second);
      CHECK(std::abs(b.period_trend[i].second - cand.predicted_period) >
            std::abs(b.period_trend[i - 1].second - cand.predicted_period));
    }
    for (const auto& o : b.orbits) {
      CHECK(o.residual < 1e-9 * (1.0 + s.eq.z0.norm()));
      CHECK(energy_variation(s.system, o, 4 * o.modes() + 1) < 1e-8);
    }
  }
}

TEST_CASE("symmetry orbit of solutions") {
  const auto s = setup("satellite", {{"omega", 1.0}, {"c", 0.1}});
  const auto o = solve_orbit(s.system, s.eq, s.report.candidates[1], 0.02);
  const double base = max_residual(s.system, o, 129);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  for (int i = 0; i < 10; ++i) {
    const Matrix gamma = s.system.symmetry.element({angle(rng)});
    const auto moved = transform_orbit(o, gamma, angle(rng));
    CHECK(std::abs(max_residual(s.system, moved, 129) - base) < 1e-12);
    CHECK(std::abs(sobolev_norm(moved, gamma * s.eq.z0) - o.amplitude) < 1e-12);
  }
  // Time shift alone.
  const auto shifted = transform_orbit(o, Matrix(), 1.0);
  CHECK((shifted.value(0.0) - o.value(1.0)).norm() < 1e-13);
}

TEST_CASE("solver failures") {
  const auto s = setup("satellite", {{"omega", 1.0}, {"c", 0.1}});
  OrbitSolverOptions strict;
  strict.tolerance = 1e-30;
  strict.max_modes = 16;
  try {
    solve_orbit(s.system, s.eq, s.report.candidates[0], 1e-3, strict);
    FAIL("expected NoConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConvergence);
  }
  BranchOptions opts;
  opts.steps = 3;
  opts.solver = strict;
  const auto b = continue_branch(s.system, s.eq, s.report.candidates[0], opts);
  CHECK(b.failure.has_value());
  CHECK(b.orbits.empty());
  CHECK_THROWS_AS(solve_orbit(s.system, s.eq, s.report.candidates[0], -1.0), Error);
}

TEST_CASE("pendulum periods match the elliptic integral") {
  const auto sys = testing::pendulum();
  const auto eq = refine_equilibrium(sys, Vector::Zero(2));
  const auto rep = analyze(sys, eq);
  REQUIRE(rep.candidates.size() == 1);
  BranchOptions opts;
  opts.steps = 5;
  opts.s0 = 0.05;
  const auto b = continue_branch(sys, eq, rep.candidates[0], opts);
  REQUIRE(b.complete(5));
  for (const auto& o : b.orbits) {
    double mean = 0.0;
    for (int i = 0; i < 64; ++i) mean += sys.energy(o.value(kTwoPi * i / 64.0)) / 64.0;
    const double expected = testing::pendulum_period(mean);
    CHECK(std::abs(o.period() - expected) / expected < 1e-4);
  }
}
