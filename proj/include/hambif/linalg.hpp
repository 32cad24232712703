#pragma once

// Dense small-matrix primitives. Everything here is a pure function of its
// arguments; matrices are expected to be at most a few dozen rows.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace hambif {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;

/// Relative threshold below which an eigenvalue is treated as zero.
inline constexpr double kZeroRelTol = 1e-8;
/// Symmetry tolerance accepted by the Morse-index routines.
inline constexpr double kSymmetryTol = 1e-10;

/// 2N x 2N matrix [[0, I], [-I, 0]].
Matrix standard_symplectic(int half_dim);

/// eps_zero = 1e-8 * (1 + spectral radius estimate).
double zero_threshold(const Matrix& m);

/// Counts of negative, zero and positive eigenvalues of a symmetric matrix.
struct Inertia {
  int negative = 0;
  int zero = 0;
  int positive = 0;
};

/// Inertia with the scale-aware zero band. Throws NonSymmetric.
Inertia inertia(const Matrix& symmetric);
int morse_index_negative(const Matrix& symmetric);
int morse_index_positive(const Matrix& symmetric);

/// All eigenvalues of a real square matrix, with conjugate pairs made exact.
std::vector<std::complex<double>> general_eigenvalues(const Matrix& m);

/// Orthonormal real basis (as columns) of the real invariant subspace of `m`
/// belonging to the eigenvalue cluster {+i*beta, -i*beta}.
///
/// The basis is built from the real and imaginary parts of the complex
/// eigenvectors in the cluster. Throws NotAnEigenvalue when no eigenvalue is
/// close to i*beta, ConvergenceFailure when the cluster is defective.
Matrix real_invariant_subspace(const Matrix& m, double beta);

/// Number of eigenvalues of `m` within the cluster tolerance of i*beta.
int imaginary_cluster_multiplicity(const Matrix& m, double beta);

/// Orthonormal basis (as columns) of the orthogonal complement of the span
/// of `vectors` in R^ambient_dim. Rank deficiency is detected by SVD.
Matrix orthogonal_complement(const std::vector<Vector>& vectors, int ambient_dim);

/// Orthonormal basis of span(vectors); near-zero directions are dropped.
Matrix orthonormal_span(const std::vector<Vector>& vectors, int ambient_dim);

/// Smallest singular value.
double min_singular_value(const Matrix& m);

/// Coefficients c_0..c_n of det(t I - m) = sum c_i t^i (Faddeev-LeVerrier).
std::vector<double> characteristic_polynomial(const Matrix& m);

bool is_symmetric(const Matrix& m, double tol = kSymmetryTol);

}  // namespace hambif
