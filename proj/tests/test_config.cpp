#include <doctest.h>

#include <random>
#include <sstream>

#include <json.hpp>

#include "hambif/config.hpp"
#include "hambif/error.hpp"
#include "hambif/report.hpp"

using namespace hambif;

namespace {

const char* kSatelliteInline = R"(
; satellite as an inline polynomial plus the radial terms
[system]
guess = 1, 0, 0, 0, -1, 0

[polynomial]
half_dim = 3
terms = 0.5:0,0,0,2,0,0 | 0.5:0,0,0,0,2,0 | 0.5:0,0,0,0,0,2 | 1:1,0,0,0,1,0 | -1:0,1,0,1,0,0
radial_c = 0.1

[symmetry]
generators = 0,-1,0,0,0,0, 1,0,0,0,0,0, 0,0,0,0,0,0, 0,0,0,0,-1,0, 0,0,0,1,0,0, 0,0,0,0,0,0

[analysis]
kmax = 12
criteria = mplus, zj-signature

[branch]
steps = 4
s0 = 2e-3

[output]
format = json-lines
path = out.jsonl

[run]
seed = 42
)";

ErrorCode parse_error(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("config accepted: " << text);
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("parse an inline polynomial config") {
  const auto c = parse_config_string(kSatelliteInline);
  REQUIRE(c.polynomial.has_value());
  CHECK_FALSE(c.preset.has_value());
  CHECK(c.polynomial->half_dim == 3);
  CHECK(c.polynomial->terms.size() == 5);
  CHECK(c.polynomial->radial_c == 0.1);
  REQUIRE(c.generators.size() == 1);
  CHECK(c.generators[0](1, 0) == 1.0);
  CHECK(c.generators[0](3, 4) == -1.0);
  CHECK(c.k_max == 12);
  CHECK(c.criteria == std::set<Criterion>{Criterion::MPlus, Criterion::ZjSignature});
  CHECK(c.steps == 4);
  CHECK(c.s0 == 2e-3);
  CHECK(c.format == OutputFormat::JsonLines);
  CHECK(c.output_path == "out.jsonl");
  CHECK(c.seed == 42);
  REQUIRE(c.guess.has_value());
  CHECK((*c.guess)[4] == -1.0);
}

TEST_CASE("inline satellite matches the preset") {
  const auto c = parse_config_string(kSatelliteInline);
  const auto inline_sys = build_system(c);
  const auto preset_sys = preset("satellite", {{"omega", 1.0}, {"c", 0.1}});
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 0.1);
  for (int i = 0; i < 20; ++i) {
    Vector z = preset_sys.probe_center;
    for (int k = 0; k < 6; ++k) z[k] += normal(rng);
    CHECK(std::abs(inline_sys.energy(z) - preset_sys.energy(z)) < 1e-13);
    CHECK(((*inline_sys.gradient)(z) - (*preset_sys.gradient)(z)).norm() < 1e-12);
    CHECK(((*inline_sys.hessian)(z) - (*preset_sys.hessian)(z)).norm() < 1e-12);
  }
  const auto eq = refine_equilibrium(inline_sys, build_guess(c));
  const auto rep = analyze(inline_sys, eq, analysis_options(c));
  CHECK(rep.confirmed_count() == 2);
}

TEST_CASE("polynomial derivatives are exact") {
  PolynomialSpec spec;
  spec.half_dim = 2;
  spec.terms = {{1.5, {3, 1, 0, 2}}, {-0.25, {0, 0, 4, 0}}, {2.0, {1, 1, 1, 1}}, {0.7, {0, 2, 0, 0}}, {3.0, {0, 0, 0, 0}}};
  const auto sys = polynomial_system(spec);
  Vector z(4);
  z << 0.3, -1.1, 0.8, 0.5;
  const double x = z[0], y = z[1], u = z[2], v = z[3];
  const double h = 1.5 * x * x * x * y * v * v - 0.25 * u * u * u * u + 2.0 * x * y * u * v + 0.7 * y * y + 3.0;
  CHECK(sys.energy(z) == doctest::Approx(h).epsilon(1e-15));
  Vector g(4);
  g << 4.5 * x * x * y * v * v + 2.0 * y * u * v, 1.5 * x * x * x * v * v + 2.0 * x * u * v + 1.4 * y,
      -u * u * u + 2.0 * x * y * v, 3.0 * x * x * x * y * v + 2.0 * x * y * u;
  CHECK(((*sys.gradient)(z) - g).norm() < 1e-14);
  Matrix hess(4, 4);
  hess(0, 0) = 9.0 * x * y * v * v;
  hess(0, 1) = 4.5 * x * x * v * v + 2.0 * u * v;
  hess(0, 2) = 2.0 * y * v;
  hess(0, 3) = 9.0 * x * x * y * v + 2.0 * y * u;
  hess(1, 1) = 1.4;
  hess(1, 2) = 2.0 * x * v;
  hess(1, 3) = 3.0 * x * x * x * v + 2.0 * x * u;
  hess(2, 2) = -3.0 * u * u;
  hess(2, 3) = 2.0 * x * y;
  hess(3, 3) = 3.0 * x * x * x * y;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < i; ++j) hess(i, j) = hess(j, i);
  }
  CHECK(((*sys.hessian)(z) - hess).norm() < 1e-13);
}

TEST_CASE("config round trip") {
  const auto c = parse_config_string(kSatelliteInline);
  const std::string text = serialize_config(c);
  const auto again = parse_config_string(text);
  CHECK(equivalent(c, again));
  CHECK(serialize_config(again) == text);

  RunConfig p;
  p.preset = "satellite";
  p.params = {{"omega", 0.1 + 0.2}, {"c", 1.0 / 3.0}};
  p.j0 = 2;
  p.minimal_only = true;
  p.tolerance = 1e-11;
  p.candidate = 1;
  p.format = OutputFormat::Csv;
  p.seed = 18446744073709551615ULL;
  const auto q = parse_config_string(serialize_config(p));
  CHECK(equivalent(p, q));
  CHECK(q.params.at("omega") == 0.1 + 0.2);

  RunConfig other = q;
  other.s0 = 2e-3;
  CHECK_FALSE(equivalent(p, other));
}

TEST_CASE("preset listing configs parse") {
  std::ostringstream out;
  write_presets(out, OutputFormat::JsonLines);
  std::istringstream lines(out.str());
  std::string line;
  int records = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    const auto cfg = parse_config_string(j.at("config").get<std::string>());
    REQUIRE(cfg.preset.has_value());
    CHECK(*cfg.preset == j.at("name").get<std::string>());
    CHECK(cfg.params.at(j.at("parameter").get<std::string>()) == j.at("default").get<double>());
    CHECK(equivalent(cfg, parse_config_string(serialize_config(cfg))));
    CHECK_NOTHROW(build_system(cfg));
    ++records;
  }
  CHECK(records >= 3);
}

TEST_CASE("config errors") {
  CHECK(parse_error("[system]\n") == ErrorCode::ConfigParse);  // neither preset nor polynomial
  CHECK(parse_error("[system]\npreset = harmonic\n[polynomial]\nhalf_dim = 1\nterms = 1:2,0\n") ==
        ErrorCode::ConfigParse);
  CHECK(parse_error("[bogus]\nx = 1\n") == ErrorCode::ConfigParse);
  CHECK(parse_error("[system]\npreset = harmonic\nflavour = 1\n") == ErrorCode::ConfigParse);
  CHECK(parse_error("[system]\npreset = harmonic\n[params]\nbeta = abc\n") == ErrorCode::ConfigParse);
  CHECK(parse_error("[system]\npreset = harmonic\n[params]\nbeta = 1.0x\n") == ErrorCode::ConfigParse);
  CHECK(parse_error("[polynomial]\nhalf_dim = 1\nterms = 1:2\n") == ErrorCode::ConfigParse);
  CHECK(parse_error("[polynomial]\nhalf_dim = 1\nterms = 1 2,0\n") == ErrorCode::ConfigParse);
  CHECK(parse_error("[polynomial]\nhalf_dim = 1\nterms = 1:2,0\nradial_c = 0.1\n") == ErrorCode::ConfigParse);
  CHECK(parse_error("[polynomial]\nhalf_dim = 1\nterms = 1:-2,0\n") == ErrorCode::ConfigParse);
  CHECK(parse_error("[system]\npreset = harmonic\n[analysis]\nkmax = 0\n") == ErrorCode::ConfigParse);
  CHECK(parse_error("[system]\npreset = harmonic\n[analysis]\ncriteria = a7\n") == ErrorCode::ConfigParse);
  CHECK(parse_error("[system]\npreset = harmonic\n[branch]\ngrowth = 1\n") == ErrorCode::ConfigParse);
  CHECK(parse_error("[system]\npreset = harmonic\n[output]\nformat = xml\n") == ErrorCode::ConfigParse);
  CHECK(parse_error("[polynomial]\nhalf_dim = 1\nterms = 1:2,0\n[symmetry]\ngenerators = 0,1,-1\n") ==
        ErrorCode::ConfigParse);
  CHECK(parse_error("[system]\npreset = harmonic\n[system]\npreset = satellite\n") == ErrorCode::ConfigParse);
  CHECK(parse_error("[system\npreset = harmonic\n") == ErrorCode::ConfigParse);
}
