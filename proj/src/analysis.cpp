#include "hambif/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "hambif/error.hpp"

namespace hambif {

namespace {

// Imaginary parts below this (relative) bound are treated as part of the
// zero eigenvalue: a nilpotent zero block of J A splits into a pair of size
// ~sqrt(machine eps) under rounding.
constexpr double kBetaFloorRel = 1e-6;
constexpr double kBetaClusterRel = 1e-6;
constexpr double kIntegerTol = 1e-9;
constexpr double kLevelMergeRel = 1e-12;

double matrix_scale(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().colwise().sum().maxCoeff(); }

void require_mode(const SpectralReport& report, int j0) {
  if (j0 < 1 || j0 > report.mode_count()) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("mode index {} outside 1..{}", j0, report.mode_count()));
  }
}

Inertia compressed_inertia(const Matrix& a, const Matrix& basis) {
  const Matrix c = basis.transpose() * a * basis;
  return inertia(0.5 * (c + c.transpose()));
}

bool definite(const Inertia& in, int dim) {
  return dim > 0 && in.zero == 0 && (in.negative == dim || in.positive == dim);
}

bool is_near_positive_integer(double x) {
  const double r = std::round(x);
  return r >= 1.0 && std::abs(x - r) <= kIntegerTol * std::max(1.0, r);
}

}  // namespace

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Confirmed: return "confirmed";
    case Verdict::ConfirmedNonMinimal: return "confirmed-nonminimal";
    case Verdict::Rejected: return "rejected";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string_view to_string(Criterion criterion) {
  switch (criterion) {
    case Criterion::ZjSignature: return "zj-signature";
    case Criterion::ZjDefinite: return "zj-definite";
    case Criterion::ZDefinite: return "z-definite";
    case Criterion::MPlus: return "mplus";
  }
  return "";
}

std::optional<Criterion> criterion_from_string(std::string_view name) {
  for (const auto c : {Criterion::ZjSignature, Criterion::ZjDefinite, Criterion::ZDefinite, Criterion::MPlus}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

SpectralReport spectral_report(const Matrix& hessian) {
  if (hessian.rows() != hessian.cols() || hessian.rows() % 2 != 0 || hessian.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, "Hessian must be square of even dimension");
  }
  if (!is_symmetric(hessian, 1e-9)) throw Error(ErrorCode::NonSymmetric, "Hessian is not symmetric");
  SpectralReport report;
  report.half_dim = static_cast<int>(hessian.rows() / 2);
  report.hessian = 0.5 * (hessian + hessian.transpose());
  const Inertia in = inertia(report.hessian);
  report.m_plus = in.positive;
  report.m_minus = in.negative;
  report.kernel_dim = in.zero;

  const Matrix ja = standard_symplectic(report.half_dim) * report.hessian;
  report.eigenvalues_ja = general_eigenvalues(ja);
  const double eps = zero_threshold(ja);
  const double scale = 1.0 + matrix_scale(ja);
  std::vector<double> imag;
  for (const auto& ev : report.eigenvalues_ja) {
    if (std::abs(ev.real()) < eps && ev.imag() > kBetaFloorRel * scale) imag.push_back(ev.imag());
  }
  std::sort(imag.begin(), imag.end(), std::greater<>());
  for (std::size_t i = 0; i < imag.size();) {
    std::size_t j = i + 1;
    double sum = imag[i];
    while (j < imag.size() && imag[i] - imag[j] < kBetaClusterRel * scale) sum += imag[j++];
    report.betas.push_back(sum / static_cast<double>(j - i));
    report.multiplicities.push_back(static_cast<int>(j - i));
    i = j;
  }
  for (const double beta : report.betas) {
    try {
      report.subspaces.push_back(real_invariant_subspace(ja, beta));
      report.defective.push_back(false);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ConvergenceFailure) throw;
      report.subspaces.emplace_back(ja.rows(), 0);
      report.defective.push_back(true);
    }
  }
  return report;
}

SpectralReport spectral_report(const HamiltonianSystem& system, const EquilibriumOrbit& eq) {
  return spectral_report(hessian_of(system, eq.z0));
}

Matrix t_matrix(const Matrix& a, int k, double lambda) {
  if (a.rows() != a.cols() || a.rows() % 2 != 0) throw Error(ErrorCode::InvalidArgument, "A must be 2N x 2N");
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "mode number k must be >= 1");
  const auto n2 = a.rows();
  const Matrix j = standard_symplectic(static_cast<int>(n2 / 2));
  const Matrix diag = -(lambda / k) * a;
  Matrix t(2 * n2, 2 * n2);
  t.topLeftCorner(n2, n2) = diag;
  t.bottomRightCorner(n2, n2) = diag;
  t.topRightCorner(n2, n2) = -j;
  t.bottomLeftCorner(n2, n2) = j;
  return t;
}

std::vector<double> ResonanceSet::levels() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.lambda);
  return out;
}

ResonanceSet resonance_set(const SpectralReport& report, int k_max) {
  if (report.betas.empty()) throw Error(ErrorCode::NoImaginaryPairs, "J A has no purely imaginary eigenvalues");
  if (k_max < 1) throw Error(ErrorCode::InvalidArgument, "k_max must be >= 1");
  std::vector<Resonance> raw;
  for (int j = 1; j <= report.mode_count(); ++j) {
    for (int k = 1; k <= k_max; ++k) raw.push_back({k / report.betas[j - 1], {{k, j}}});
  }
  std::sort(raw.begin(), raw.end(), [](const Resonance& a, const Resonance& b) { return a.lambda < b.lambda; });
  ResonanceSet set;
  for (auto& r : raw) {
    if (!set.entries.empty() &&
        std::abs(r.lambda - set.entries.back().lambda) <= kLevelMergeRel * r.lambda) {
      auto& back = set.entries.back().contributors;
      back.insert(back.end(), r.contributors.begin(), r.contributors.end());
    } else {
      set.entries.push_back(std::move(r));
    }
  }
  return set;
}

bool check_nonresonance(const SpectralReport& report, int j0) {
  require_mode(report, j0);
  const double b0 = report.betas[j0 - 1];
  for (int j = 1; j <= report.mode_count(); ++j) {
    if (j == j0) continue;
    if (is_near_positive_integer(report.betas[j - 1] / b0)) return false;
  }
  return true;
}

MorseJump morse_jump(const Matrix& a, double lambda0, const SpectralReport& report, int k_max) {
  if (!(lambda0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda0 must be positive");
  const std::vector<double> levels = resonance_set(report, k_max).levels();
  double eps = 1e-2;
  while (true) {
    const double lo = (1.0 - eps) * lambda0;
    const double hi = (1.0 + eps) * lambda0;
    const bool isolated = std::none_of(levels.begin(), levels.end(), [&](double l) {
      return l >= lo && l <= hi && std::abs(l - lambda0) > kLevelMergeRel * lambda0;
    });
    if (isolated) break;
    eps *= 0.5;
    if (eps < 1e-10) {
      throw Error(ErrorCode::EpsilonUnderflow, "no isolating interval around the level with eps > 1e-10");
    }
  }
  MorseJump out;
  out.epsilon = eps;
  out.lambda_minus = (1.0 - eps) * lambda0;
  out.lambda_plus = (1.0 + eps) * lambda0;
  const Inertia below = inertia(t_matrix(a, 1, out.lambda_minus));
  const Inertia above = inertia(t_matrix(a, 1, out.lambda_plus));
  if (below.zero != 0 || above.zero != 0) {
    throw Error(ErrorCode::EpsilonUnderflow, "T matrix is numerically singular next to the level");
  }
  out.index_below = below.negative;
  out.index_above = above.negative;
  out.jump = above.negative - below.negative;
  return out;
}

bool check_zj_signature(const SpectralReport& report, int j0) {
  require_mode(report, j0);
  const Matrix& z = report.subspaces[j0 - 1];
  if (z.cols() == 0) return false;
  const Inertia in = compressed_inertia(report.hessian, z);
  return in.negative != in.positive;
}

bool check_zj_definite(const SpectralReport& report, int j0) {
  require_mode(report, j0);
  const Matrix& z = report.subspaces[j0 - 1];
  return definite(compressed_inertia(report.hessian, z), static_cast<int>(z.cols()));
}

bool check_z_definite(const SpectralReport& report) {
  std::vector<Vector> cols;
  for (const auto& z : report.subspaces) {
    for (Eigen::Index i = 0; i < z.cols(); ++i) cols.emplace_back(z.col(i));
  }
  const Matrix basis = orthonormal_span(cols, 2 * report.half_dim);
  return definite(compressed_inertia(report.hessian, basis), static_cast<int>(basis.cols()));
}

bool check_mplus(const SpectralReport& report, int half_dim) { return report.m_plus != half_dim; }

int AnalysisReport::confirmed_count() const {
  return static_cast<int>(
      std::count_if(candidates.begin(), candidates.end(), [](const auto& c) { return c.confirmed(); }));
}

namespace {

bool isotropy_is_trivial(const HamiltonianSystem& system, const Vector& z0) {
  const double tol = 1e-8 * (1.0 + z0.norm());
  const auto& gens = system.symmetry.generators;
  for (const auto& x : gens) {
    if ((x * z0).norm() <= tol) return false;
  }
  for (std::size_t g = 0; g < gens.size(); ++g) {
    for (int i = 1; i < 64; ++i) {
      std::vector<double> times(gens.size(), 0.0);
      times[g] = 2.0 * std::numbers::pi * i / 64.0;
      if ((system.symmetry.element(times) * z0 - z0).norm() <= tol) return false;
    }
  }
  return true;
}

void assign_verdict(BifurcationCandidate& c, const AnalysisReport& report) {
  if (!report.invariance.passed) {
    c.verdict = Verdict::Inconclusive;
    c.reasons.push_back("energy is not invariant under the supplied symmetry");
    return;
  }
  if (!c.morse_jump) {
    c.verdict = Verdict::Inconclusive;
    return;
  }
  if (*c.morse_jump == 0) {
    c.verdict = Verdict::Rejected;
    c.reasons.push_back("Morse index of T_1 does not change at this level");
    return;
  }
  if (!c.degree_on_section) {
    c.verdict = Verdict::Inconclusive;
    c.reasons.push_back("degree on the orthogonal section unavailable");
    return;
  }
  if (*c.degree_on_section == 0) {
    c.verdict = Verdict::Rejected;
    c.reasons.push_back("degree on the orthogonal section vanishes");
    return;
  }
  if (c.nonresonant) {
    c.verdict = Verdict::Confirmed;
    c.routes.push_back("full-chain");
    const bool signature = (c.criteria.count(Criterion::ZjSignature) && c.criteria.at(Criterion::ZjSignature)) ||
                           (c.criteria.count(Criterion::ZjDefinite) && c.criteria.at(Criterion::ZjDefinite));
    if (signature) c.routes.push_back("subspace-signature");
  } else {
    c.verdict = Verdict::ConfirmedNonMinimal;
    c.reasons.push_back("resonant level: branch exists but its period is not certified minimal");
  }
  if (c.criteria.count(Criterion::ZDefinite) && c.criteria.at(Criterion::ZDefinite)) {
    c.routes.push_back("definite-subspace");
  }
  if (c.criteria.count(Criterion::MPlus) && c.criteria.at(Criterion::MPlus)) c.routes.push_back("morse-count");
}

}  // namespace

AnalysisReport analyze(const HamiltonianSystem& system, const EquilibriumOrbit& eq, const AnalysisOptions& options) {
  AnalysisReport report;
  report.equilibrium = eq;
  report.spectrum = spectral_report(system, eq);
  const SpectralReport& spec = report.spectrum;
  report.invariance = invariance_check(system, options.invariance_samples, options.seed);
  report.isotropy_trivial = isotropy_is_trivial(system, eq.z0);
  report.orbit_nondegenerate = spec.kernel_dim == eq.orbit_dim;
  report.z_definite = !spec.betas.empty() && check_z_definite(spec);
  report.mplus_differs = check_mplus(spec, system.half_dim);

  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(spec.hessian, Eigen::EigenvaluesOnly);
    const double eps = zero_threshold(spec.hessian);
    double product = 1.0;
    for (const double ev : es.eigenvalues()) {
      if (std::abs(ev) > eps) product *= ev;
    }
    report.free_eigenvalue_product = product;
    report.diagnostics.push_back(fmt::format("hessian inertia: m- = {}, m+ = {}, kernel = {}, orbit dim = {}",
                                             spec.m_minus, spec.m_plus, spec.kernel_dim, eq.orbit_dim));
    report.diagnostics.push_back(
        fmt::format("product of nonzero hessian eigenvalues = {:.6e}", report.free_eigenvalue_product));
  }
  report.diagnostics.push_back(report.isotropy_trivial ? "isotropy at z0 trivial (heuristically verified)"
                                                       : "isotropy at z0 possibly nontrivial");
  report.diagnostics.push_back(report.orbit_nondegenerate ? "orbit isolated (certified: nondegenerate orbit)"
                                                          : "orbit isolation unverified");
  if (!report.invariance.passed) {
    report.diagnostics.push_back(
        fmt::format("invariance check failed, max violation {:.3e}", report.invariance.max_violation));
  }

  if (spec.betas.empty()) {
    report.diagnostics.push_back("no purely imaginary eigenvalues: no bifurcation levels");
    return report;
  }

  try {
    report.degree = section_degree(system, eq, options.seed);
  } catch (const Error& e) {
    report.degree.value.reset();
    report.degree.note = e.what();
  }

  for (int j = 1; j <= spec.mode_count(); ++j) {
    if (options.j0 && *options.j0 != j) continue;
    BifurcationCandidate c;
    c.j0 = j;
    c.beta = spec.betas[j - 1];
    c.lambda0 = 1.0 / c.beta;
    c.predicted_period = 2.0 * std::numbers::pi / c.beta;
    c.multiplicity = spec.multiplicities[j - 1];
    c.nonresonant = check_nonresonance(spec, j);
    if (options.minimal_only && !c.nonresonant) continue;
    if (c.multiplicity > 1) c.reasons.push_back(fmt::format("multiplicity {} > 1", c.multiplicity));
    if (spec.defective[j - 1]) c.reasons.push_back("defective eigenvalue cluster");
    try {
      c.morse_jump = morse_jump(spec.hessian, c.lambda0, spec, options.k_max).jump;
    } catch (const Error& e) {
      c.reasons.push_back(e.what());
    }
    for (const auto crit : options.criteria) {
      switch (crit) {
        case Criterion::ZjSignature: c.criteria[crit] = check_zj_signature(spec, j); break;
        case Criterion::ZjDefinite: c.criteria[crit] = check_zj_definite(spec, j); break;
        case Criterion::ZDefinite: c.criteria[crit] = report.z_definite; break;
        case Criterion::MPlus: c.criteria[crit] = report.mplus_differs; break;
      }
    }
    c.degree_on_section = report.degree.value;
    c.degree_path = report.degree.path;
    if (report.degree.heuristic) c.reasons.push_back("degree from the heuristic regular-value path");
    if (!report.isotropy_trivial) c.reasons.push_back("isotropy possibly nontrivial");
    if (!report.orbit_nondegenerate) c.reasons.push_back("orbit isolation unverified");
    assign_verdict(c, report);
    report.candidates.push_back(std::move(c));
  }
  return report;
}

}  // namespace hambif
