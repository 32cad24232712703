#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hambif/degree.hpp"
#include "hambif/linalg.hpp"
#include "hambif/model.hpp"

namespace hambif {

/// Linearisation data at an equilibrium. Mode indices j are 1-based and
/// betas are sorted strictly decreasing: betas[0] is beta_1, the largest.
struct SpectralReport {
  int half_dim = 0;
  Matrix hessian;
  std::vector<std::complex<double>> eigenvalues_ja;
  std::vector<double> betas;
  std::vector<int> multiplicities;
  /// Orthonormal basis of the real invariant subspace of J A for +-i beta_j;
  /// empty (zero columns) when the cluster is defective.
  std::vector<Matrix> subspaces;
  std::vector<bool> defective;
  int m_plus = 0;
  int m_minus = 0;
  int kernel_dim = 0;

  int mode_count() const { return static_cast<int>(betas.size()); }
};

SpectralReport spectral_report(const Matrix& hessian);
SpectralReport spectral_report(const HamiltonianSystem& system, const EquilibriumOrbit& eq);

/// [[-(lambda/k) A, -J], [J, -(lambda/k) A]], the linearised variational
/// operator on the k-th Fourier mode.
Matrix t_matrix(const Matrix& a, int k, double lambda);

struct Resonance {
  double lambda = 0.0;
  std::vector<std::pair<int, int>> contributors;  // (k, j)
};

/// Levels k / beta_j for 1 <= k <= k_max, merged and sorted ascending.
struct ResonanceSet {
  std::vector<Resonance> entries;

  std::vector<double> levels() const;
};

ResonanceSet resonance_set(const SpectralReport& report, int k_max);

/// True iff beta_j / beta_{j0} is not within 1e-9 of a positive integer for
/// every j != j0.
bool check_nonresonance(const SpectralReport& report, int j0);

struct MorseJump {
  int jump = 0;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  int index_below = 0;
  int index_above = 0;
  double epsilon = 0.0;
};

/// m^-(T_{1,lambda+}(A)) - m^-(T_{1,lambda-}(A)) with lambda+- = (1 +- eps)
/// lambda0; eps starts at 1e-2 and is halved until lambda0 is the only
/// resonance level (up to k_max) inside [lambda-, lambda+].
MorseJump morse_jump(const Matrix& a, double lambda0, const SpectralReport& report, int k_max = 20);

/// Signature of A compressed to Z_{j0} is unbalanced.
bool check_zj_signature(const SpectralReport& report, int j0);
/// A compressed to Z_{j0} is definite.
bool check_zj_definite(const SpectralReport& report, int j0);
/// A compressed to the sum of all Z_j is definite.
bool check_z_definite(const SpectralReport& report);
/// m^+(A) != N.
bool check_mplus(const SpectralReport& report, int half_dim);

enum class Verdict { Confirmed, ConfirmedNonMinimal, Rejected, Inconclusive };

std::string_view to_string(Verdict verdict);

/// Sufficient-condition variants that can be requested individually.
enum class Criterion { ZjSignature, ZjDefinite, ZDefinite, MPlus };

std::string_view to_string(Criterion criterion);
std::optional<Criterion> criterion_from_string(std::string_view name);

struct BifurcationCandidate {
  int j0 = 0;  // 1-based mode index
  double beta = 0.0;
  double lambda0 = 0.0;
  double predicted_period = 0.0;
  int multiplicity = 1;
  bool nonresonant = false;
  std::optional<int> morse_jump;
  std::optional<int> degree_on_section;
  DegreePath degree_path = DegreePath::None;
  std::map<Criterion, bool> criteria;
  Verdict verdict = Verdict::Inconclusive;
  /// Sufficient-condition routes that certify this level, e.g. "full-chain".
  std::vector<std::string> routes;
  std::vector<std::string> reasons;

  bool confirmed() const { return verdict == Verdict::Confirmed || verdict == Verdict::ConfirmedNonMinimal; }
};

struct AnalysisOptions {
  int k_max = 20;
  std::optional<int> j0;
  /// Only emit candidates passing the nonresonance check.
  bool minimal_only = false;
  std::set<Criterion> criteria = {Criterion::ZjSignature, Criterion::ZjDefinite, Criterion::ZDefinite,
                                  Criterion::MPlus};
  std::uint64_t seed = 1;
  int invariance_samples = 64;
};

struct AnalysisReport {
  EquilibriumOrbit equilibrium;
  SpectralReport spectrum;
  InvarianceReport invariance;
  /// Free action at z0, checked on one-parameter subgroups (heuristic).
  bool isotropy_trivial = true;
  /// dim ker Hessian == orbit dimension, which certifies an isolated orbit.
  bool orbit_nondegenerate = false;
  DegreeReport degree;
  bool z_definite = false;
  bool mplus_differs = false;
  /// Product of the Hessian eigenvalues outside the numerical kernel.
  double free_eigenvalue_product = 0.0;
  std::vector<BifurcationCandidate> candidates;
  std::vector<std::string> diagnostics;

  int confirmed_count() const;
};

AnalysisReport analyze(const HamiltonianSystem& system, const EquilibriumOrbit& eq, const AnalysisOptions& options = {});

}  // namespace hambif
