// hambif: bifurcation of periodic orbits from symmetric equilibria.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hambif/analysis.hpp"
#include "hambif/config.hpp"
#include "hambif/error.hpp"
#include "hambif/orbit.hpp"
#include "hambif/report.hpp"

namespace {

using namespace hambif;

struct Flags {
  std::optional<std::string> preset;
  std::optional<std::string> config_path;
  std::optional<double> omega, c, beta;
  std::optional<int> kmax, j0, steps, modes, candidate;
  std::optional<double> s0, growth, tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<std::string> format;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--preset", f.preset, "Preset system (see 'presets')");
  cmd->add_option("--config", f.config_path, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--omega", f.omega, "satellite: rotation rate");
  cmd->add_option("--c", f.c, "satellite: oblateness constant");
  cmd->add_option("--beta", f.beta, "harmonic: frequency");
  cmd->add_option("--kmax", f.kmax, "Largest Fourier index for resonance levels (default 20)");
  cmd->add_option("--j0", f.j0, "Only analyse mode j0 (1-based, betas descending)");
  cmd->add_option("--seed", f.seed, "Random seed (default 1)");
  cmd->add_option("--output", f.output, "Machine-readable output file");
  cmd->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"text", "json-lines", "csv"}));
}

void add_branch(CLI::App* cmd, Flags& f) {
  cmd->add_option("--steps", f.steps, "Number of amplitudes (default 8)");
  cmd->add_option("--s0", f.s0, "Smallest amplitude (default 1e-3)");
  cmd->add_option("--growth", f.growth, "Amplitude ratio between steps (default 2)");
  cmd->add_option("--modes", f.modes, "Initial Fourier mode count (default 8)");
  cmd->add_option("--tol", f.tol, "Residual tolerance (default 1e-9 (1 + |z0|))");
  cmd->add_option("--candidate", f.candidate, "Candidate index from analyze (default: first confirmed)");
}

RunConfig resolve(const Flags& f) {
  RunConfig c = f.config_path ? load_config(*f.config_path) : RunConfig{};
  if (f.preset) {
    if (c.polynomial) throw Error(ErrorCode::ConfigParse, "--preset conflicts with an inline polynomial");
    if (c.preset != f.preset) c.params.clear();
    c.preset = *f.preset;
  }
  if (f.omega) c.params["omega"] = *f.omega;
  if (f.c) c.params["c"] = *f.c;
  if (f.beta) c.params["beta"] = *f.beta;
  if (f.kmax) c.k_max = *f.kmax;
  if (f.j0) c.j0 = *f.j0;
  if (f.steps) c.steps = *f.steps;
  if (f.s0) c.s0 = *f.s0;
  if (f.growth) c.growth = *f.growth;
  if (f.modes) c.modes = *f.modes;
  if (f.tol) c.tolerance = *f.tol;
  if (f.candidate) c.candidate = *f.candidate;
  if (f.seed) c.seed = *f.seed;
  if (f.output) c.output_path = *f.output;
  if (f.format) c.format = output_format_from_string(*f.format);
  validate(c);
  // Re-run the config checks on the merged values.
  return parse_config_string(serialize_config(c));
}

struct Analysis {
  HamiltonianSystem system;
  EquilibriumOrbit eq;
  AnalysisReport report;
};

Analysis run_analysis(const RunConfig& config) {
  Analysis a;
  a.system = build_system(config);
  a.eq = refine_equilibrium(a.system, build_guess(config));
  a.report = analyze(a.system, a.eq, analysis_options(config));
  return a;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, fmt::format("cannot write '{}'", path));
  return out;
}

int cmd_analyze(const RunConfig& config) {
  const Analysis a = run_analysis(config);
  if (!config.output_path.empty()) {
    write_analysis_text(std::cout, a.report);
    auto out = open_output(config.output_path);
    write_analysis_records(out, a.report, config.format);
  } else {
    write_analysis_records(std::cout, a.report, config.format);
  }
  return a.report.confirmed_count() > 0 ? 0 : 2;
}

int cmd_branch(const RunConfig& config) {
  const Analysis a = run_analysis(config);
  const auto& cands = a.report.candidates;
  std::size_t index = 0;
  if (config.candidate) {
    index = static_cast<std::size_t>(*config.candidate - 1);
    if (index >= cands.size()) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("no candidate {} ({} available)", *config.candidate,
                                                          cands.size()));
    }
  } else {
    while (index < cands.size() && !cands[index].confirmed()) ++index;
    if (index == cands.size()) throw Error(ErrorCode::InvalidArgument, "no confirmed candidate to follow");
  }
  const BifurcationCandidate& cand = cands[index];
  if (!cand.confirmed()) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("candidate {} is {}, not confirmed", index + 1, to_string(cand.verdict)));
  }

  BranchOptions opts;
  opts.steps = config.steps;
  opts.s0 = config.s0;
  opts.growth = config.growth;
  opts.solver.modes = config.modes;
  opts.solver.max_modes = std::max(64, config.modes);
  opts.solver.tolerance = config.tolerance;
  const Branch branch = continue_branch(a.system, a.eq, cand, opts);

  if (!config.output_path.empty()) {
    write_branch_text(std::cout, branch);
    {
      auto out = open_output(config.output_path);
      write_branch_records(out, branch, config.format);
    }
    auto coeff = open_output(config.output_path + ".coefficients");
    write_coefficient_records(coeff, branch, config.format);
  } else {
    write_branch_records(std::cout, branch, config.format);
  }
  write_trend_summary(config.format == OutputFormat::Text || !config.output_path.empty() ? std::cout : std::cerr,
                      branch);
  const bool ok = !branch.failure && branch.orbits.size() >= 3 && branch.issues.empty();
  return ok ? 0 : 1;
}

std::string field_help() {
  auto list = [](const std::vector<std::string>& f) {
    std::string s;
    for (std::size_t i = 0; i < f.size(); ++i) s += (i ? ", " : "") + f[i];
    return s;
  };
  return "Machine formats: json-lines (one object per line) or csv (header row).\n"
         "Numbers carry 17 significant digits. Field order:\n"
         "  analyze:  " + list(analysis_fields()) + "\n"
         "  branch:   " + list(branch_fields()) + "\n"
         "  branch coefficients (PATH.coefficients): " + list(coefficient_fields()) + "\n"
         "  presets:  " + list(preset_fields()) + "\n"
         "Exit codes: analyze 0 if a candidate is confirmed, 2 if none; branch 0 on a\n"
         "branch of >= 3 orbits satisfying the trend checks; 1 on any error.";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bifurcation of periodic orbits from symmetric equilibria of Hamiltonian systems"};
  app.footer(field_help());
  app.require_subcommand(1);

  Flags analyze_flags;
  auto* analyze_cmd = app.add_subcommand("analyze", "Spectral and degree analysis of an equilibrium orbit");
  add_common(analyze_cmd, analyze_flags);

  Flags branch_flags;
  auto* branch_cmd = app.add_subcommand("branch", "Follow the periodic branch of a confirmed candidate");
  add_common(branch_cmd, branch_flags);
  add_branch(branch_cmd, branch_flags);

  std::optional<std::string> presets_format;
  auto* presets_cmd = app.add_subcommand("presets", "List built-in systems");
  presets_cmd->add_option("--format", presets_format, "Output format")
      ->check(CLI::IsMember({"text", "json-lines", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*analyze_cmd) return cmd_analyze(resolve(analyze_flags));
    if (*branch_cmd) return cmd_branch(resolve(branch_flags));
    if (*presets_cmd) {
      write_presets(std::cout, presets_format ? output_format_from_string(*presets_format) : OutputFormat::Text);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
