#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hambif/config.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using testing::run_command;

namespace {

const std::string kExe = HAMBIF_EXE;

std::string cli(const std::string& args) { return kExe + " " + args; }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hambif_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<nlohmann::json> json_lines(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

}  // namespace

TEST_CASE("analyze exit codes") {
  std::string out;
  CHECK(run_command(cli("analyze --preset satellite --omega 1 --c 0.1"), &out) == 0);
  CHECK(out.find("confirmed") != std::string::npos);

  CHECK(run_command(cli("analyze --preset harmonic --beta 1 --format json-lines"), &out) == 0);
  const auto recs = json_lines(out);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0]["lambda0"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(recs[0]["period"].get<double>() == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-12));
  CHECK(recs[0]["verdict"] == "confirmed");

  CHECK(run_command(cli("analyze --preset coupled-springs"), &out) == 0);

  const auto saddle = scratch("saddle.ini");
  std::ofstream(saddle) << "[polynomial]\nhalf_dim = 1\nterms = 0.5:0,2 | -0.5:2,0\n";
  CHECK(run_command(cli("analyze --config " + saddle.string() + " --format csv"), &out) == 2);
  CHECK(out.find("candidate,j0,beta") == 0);
  CHECK(std::count(out.begin(), out.end(), '\n') == 1);  // header only

  CHECK(run_command(cli("analyze --preset nonesuch 2>/dev/null")) == 1);
  CHECK(run_command(cli("analyze --preset harmonic --beta -1 2>/dev/null")) == 1);
  CHECK(run_command(cli("analyze --preset harmonic --format xml 2>/dev/null")) == 1);
  const auto broken = scratch("broken.ini");
  std::ofstream(broken) << "[system]\npreset = harmonic\n[branch]\nsteps = many\n";
  CHECK(run_command(cli("analyze --config " + broken.string() + " 2>/dev/null")) == 1);
  CHECK(run_command(cli("2>/dev/null")) == 1);
}

TEST_CASE("branch exit codes and files") {
  const auto path = scratch("harmonic.csv");
  std::string out;
  CHECK(run_command(cli("branch --preset harmonic --beta 1 --format csv --output " + path.string()), &out) == 0);
  const std::string table = slurp(path);
  std::istringstream rows(table);
  std::string line;
  std::getline(rows, line);
  CHECK(line == "step,amplitude,lambda,period,residual,sup_distance,minimal_period_flag,modes");
  int count = 0;
  while (std::getline(rows, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 8);
    CHECK(std::abs(std::stod(cells[3]) - 2.0 * std::numbers::pi) < 1e-12);
    ++count;
  }
  CHECK(count == 8);
  CHECK(fs::exists(path.string() + ".coefficients"));

  const auto sat = scratch("satellite.jsonl");
  CHECK(run_command(cli("branch --preset satellite --omega 1 --c 0.1 --format json-lines --output " + sat.string()),
                    &out) == 0);
  const auto recs = json_lines(slurp(sat));
  REQUIRE(recs.size() == 8);
  CHECK(std::abs(recs[0]["period"].get<double>() - 2.0 * std::numbers::pi / testing::kSatBeta1) < 1e-6);
  const auto coeffs = json_lines(slurp(sat.string() + ".coefficients"));
  CHECK(coeffs.size() == 8u * 9u * 6u);  // orbits x (M + 1) x 2N

  // Absurd tolerance: exit 1, the table file is still written.
  const auto fail_path = scratch("fail.csv");
  fs::remove(fail_path);
  CHECK(run_command(cli("branch --preset satellite --omega 1 --c 0.1 --tol 1e-30 --format csv --output " +
                        fail_path.string()),
                    &out) == 1);
  CHECK(out.find("failure") != std::string::npos);
  REQUIRE(fs::exists(fail_path));
  CHECK(slurp(fail_path).find("step,amplitude") == 0);

  CHECK(run_command(cli("branch --preset harmonic --candidate 5 2>/dev/null")) == 1);
}

TEST_CASE("machine output is deterministic") {
  for (const std::string fmt : {"json-lines", "csv"}) {
    const auto a = scratch("det_a." + fmt);
    const auto b = scratch("det_b." + fmt);
    const std::string args = "--preset satellite --omega 1 --c 0.1 --seed 7 --format " + fmt;
    REQUIRE(run_command(cli("branch " + args + " --steps 4 --output " + a.string())) == 0);
    REQUIRE(run_command(cli("branch " + args + " --steps 4 --output " + b.string())) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a.string() + ".coefficients") == slurp(b.string() + ".coefficients"));
    std::string x, y;
    run_command(cli("analyze " + args), &x);
    run_command(cli("analyze " + args), &y);
    CHECK(x == y);
    CHECK_FALSE(x.empty());
  }
}

TEST_CASE("config file and flag overrides") {
  const auto cfg = scratch("run.ini");
  std::ofstream(cfg) << "[system]\npreset = satellite\n[params]\nomega = 1\nc = 0.1\n[analysis]\nj0 = 2\n"
                        "[output]\nformat = json-lines\n";
  std::string out;
  CHECK(run_command(cli("analyze --config " + cfg.string()), &out) == 0);
  auto recs = json_lines(out);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0]["j0"] == 2);
  CHECK(recs[0]["beta"].get<double>() == doctest::Approx(testing::kSatBeta2).epsilon(1e-10));

  CHECK(run_command(cli("analyze --config " + cfg.string() + " --j0 1"), &out) == 0);
  recs = json_lines(out);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0]["j0"] == 1);
}

TEST_CASE("presets listing") {
  std::string out;
  CHECK(run_command(cli("presets"), &out) == 0);
  CHECK(out.find("satellite") != std::string::npos);
  CHECK(out.find("1.0826359e-3") != std::string::npos);
  CHECK(out.find("0.0010826359") != std::string::npos);

  CHECK(run_command(cli("presets --format json-lines"), &out) == 0);
  for (const auto& rec : json_lines(out)) {
    const auto parsed = hambif::parse_config_string(rec["config"].get<std::string>());
    CHECK(*parsed.preset == rec["name"].get<std::string>());
  }
  CHECK(run_command(cli("presets --format csv"), &out) == 0);
  CHECK(out.find("name,parameter,default,description,config") == 0);

  CHECK(run_command(cli("--help"), &out) == 0);
  CHECK(out.find("candidate, j0, beta, lambda0, period") != std::string::npos);
}
