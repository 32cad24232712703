#include "hambif/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "hambif/error.hpp"

namespace hambif {

namespace {

// Eigenvalues within this (scale-relative) distance of i*beta belong to the
// same cluster.
constexpr double kClusterRelTol = 1e-6;
// Relative singular-value cutoff used to decide numerical rank.
constexpr double kRankRelTol = 1e-9;

double spectral_radius_estimate(const Matrix& m) {
  // Any induced norm bounds the spectral radius; the 1-norm is cheap.
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

double cluster_tolerance(const Matrix& m) {
  return kClusterRelTol * (1.0 + spectral_radius_estimate(m));
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::NotAnEigenvalue: return "NotAnEigenvalue";
    case ErrorCode::EvaluationFailure: return "EvaluationFailure";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateSection: return "DegenerateSection";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::MissingParameter: return "MissingParameter";
    case ErrorCode::NoImaginaryPairs: return "NoImaginaryPairs";
    case ErrorCode::EpsilonUnderflow: return "EpsilonUnderflow";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::NotAMinimum: return "NotAMinimum";
    case ErrorCode::BoundaryZero: return "BoundaryZero";
    case ErrorCode::Unreliable: return "Unreliable";
    case ErrorCode::EmptyKernel: return "EmptyKernel";
    case ErrorCode::WrongBranch: return "WrongBranch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigParse: return "ConfigParse";
  }
  return "Unknown";
}

Matrix standard_symplectic(int half_dim) {
  if (half_dim < 1) throw Error(ErrorCode::InvalidArgument, "symplectic half dimension must be >= 1");
  const int n = 2 * half_dim;
  Matrix j = Matrix::Zero(n, n);
  j.topRightCorner(half_dim, half_dim).setIdentity();
  j.bottomLeftCorner(half_dim, half_dim) = -Matrix::Identity(half_dim, half_dim);
  return j;
}

double zero_threshold(const Matrix& m) {
  return kZeroRelTol * (1.0 + spectral_radius_estimate(m));
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

Inertia inertia(const Matrix& symmetric) {
  if (!is_symmetric(symmetric)) {
    throw Error(ErrorCode::NonSymmetric, "matrix is not symmetric within tolerance");
  }
  Inertia out;
  if (symmetric.size() == 0) return out;
  const Matrix sym = 0.5 * (symmetric + symmetric.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::ConvergenceFailure, "symmetric eigensolver did not converge");
  }
  const double eps = zero_threshold(sym);
  for (const double ev : solver.eigenvalues()) {
    if (ev < -eps) {
      ++out.negative;
    } else if (ev > eps) {
      ++out.positive;
    } else {
      ++out.zero;
    }
  }
  return out;
}

int morse_index_negative(const Matrix& symmetric) { return inertia(symmetric).negative; }

int morse_index_positive(const Matrix& symmetric) { return inertia(symmetric).positive; }

std::vector<std::complex<double>> general_eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::InvalidArgument, "eigenvalues of a non-square matrix");
  if (!m.allFinite()) throw Error(ErrorCode::InvalidArgument, "matrix has non-finite entries");
  if (m.size() == 0) return {};
  Eigen::EigenSolver<Matrix> solver(m, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::ConvergenceFailure, "general eigensolver did not converge");
  }
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

int imaginary_cluster_multiplicity(const Matrix& m, double beta) {
  const double tol = cluster_tolerance(m);
  const std::complex<double> target(0.0, beta);
  int count = 0;
  for (const auto& ev : general_eigenvalues(m)) {
    if (std::abs(ev - target) < tol) ++count;
  }
  return count;
}

Matrix real_invariant_subspace(const Matrix& m, double beta) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::InvalidArgument, "invariant subspace of a non-square matrix");
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  const int n = static_cast<int>(m.rows());
  Eigen::EigenSolver<Matrix> solver(m, true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::ConvergenceFailure, "general eigensolver did not converge");
  }
  const double tol = cluster_tolerance(m);
  const std::complex<double> target(0.0, beta);
  std::vector<Vector> parts;
  int multiplicity = 0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(solver.eigenvalues()[i] - target) >= tol) continue;
    ++multiplicity;
    const ComplexVector v = solver.eigenvectors().col(i);
    parts.emplace_back(v.real());
    parts.emplace_back(v.imag());
  }
  if (multiplicity == 0) {
    throw Error(ErrorCode::NotAnEigenvalue, "no eigenvalue near +/- i*beta");
  }
  Matrix basis = orthonormal_span(parts, n);
  if (basis.cols() != 2 * multiplicity) {
    throw Error(ErrorCode::ConvergenceFailure, "imaginary eigenvalue cluster is defective");
  }
  return basis;
}

Matrix orthonormal_span(const std::vector<Vector>& vectors, int ambient_dim) {
  if (vectors.empty()) return Matrix(ambient_dim, 0);
  Matrix stacked(ambient_dim, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != ambient_dim) {
      throw Error(ErrorCode::InvalidArgument, "vector dimension does not match ambient dimension");
    }
    stacked.col(static_cast<Eigen::Index>(i)) = vectors[i];
  }
  Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  const double cutoff = kRankRelTol * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

Matrix orthogonal_complement(const std::vector<Vector>& vectors, int ambient_dim) {
  if (vectors.empty()) return Matrix::Identity(ambient_dim, ambient_dim);
  Matrix stacked(ambient_dim, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != ambient_dim) {
      throw Error(ErrorCode::InvalidArgument, "vector dimension does not match ambient dimension");
    }
    stacked.col(static_cast<Eigen::Index>(i)) = vectors[i];
  }
  Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  const double cutoff = kRankRelTol * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff) ++rank;
  }
  return svd.matrixU().rightCols(ambient_dim - rank);
}

double min_singular_value(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().minCoeff();
}

std::vector<double> characteristic_polynomial(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::InvalidArgument, "characteristic polynomial of a non-square matrix");
  const int n = static_cast<int>(m.rows());
  std::vector<double> coeffs(static_cast<std::size_t>(n) + 1, 0.0);
  coeffs[n] = 1.0;
  Matrix acc = Matrix::Zero(n, n);
  for (int k = 1; k <= n; ++k) {
    acc = m * acc + coeffs[n - k + 1] * Matrix::Identity(n, n);
    coeffs[n - k] = -(m * acc).trace() / k;
  }
  return coeffs;
}

}  // namespace hambif
