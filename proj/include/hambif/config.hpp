#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hambif/analysis.hpp"
#include "hambif/linalg.hpp"
#include "hambif/model.hpp"

namespace hambif {

/// c * prod_i z_i^{e_i}
struct Monomial {
  double coefficient = 0.0;
  std::vector<int> exponents;
};

/// Polynomial Hamiltonian on R^{2N}, optionally plus the oblate potential
/// V(q1, q2, q3) (N = 3 only).
struct PolynomialSpec {
  int half_dim = 1;
  std::vector<Monomial> terms;
  std::optional<double> radial_c;
};

enum class OutputFormat { Text, JsonLines, Csv };

std::string_view to_string(OutputFormat format);
OutputFormat output_format_from_string(std::string_view name);

struct RunConfig {
  std::optional<std::string> preset;
  PresetParams params;
  std::optional<PolynomialSpec> polynomial;
  std::vector<Matrix> generators;
  std::optional<Vector> guess;

  int k_max = 20;
  std::optional<int> j0;
  bool minimal_only = false;
  std::set<Criterion> criteria = {Criterion::ZjSignature, Criterion::ZjDefinite, Criterion::ZDefinite,
                                  Criterion::MPlus};

  int steps = 8;
  double s0 = 1e-3;
  double growth = 2.0;
  int modes = 8;
  double tolerance = 0.0;
  std::optional<int> candidate;

  OutputFormat format = OutputFormat::Text;
  std::string output_path;
  std::uint64_t seed = 1;
};

/// INI reader. Throws ConfigParse on malformed input.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_string(const std::string& text);
RunConfig load_config(const std::string& path);

/// Writes every field in a fixed order; parse_config inverts it exactly.
std::string serialize_config(const RunConfig& config);

bool equivalent(const RunConfig& a, const RunConfig& b);

/// Exactly one of preset and polynomial must be set; throws ConfigParse.
void validate(const RunConfig& config);

HamiltonianSystem polynomial_system(const PolynomialSpec& spec);

/// System described by the configuration, with its generators attached.
HamiltonianSystem build_system(const RunConfig& config);
Vector build_guess(const RunConfig& config);

AnalysisOptions analysis_options(const RunConfig& config);

}  // namespace hambif
