#pragma once

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "hambif/linalg.hpp"
#include "hambif/model.hpp"

namespace testing {

using hambif::Matrix;
using hambif::Vector;

// Frozen oracle values for the satellite at omega = 1, c = 0.1, from a
// 40-digit root find and eigensolve of the exact Hessian.
inline constexpr double kSatD0 = 1.0793682850356863;
inline constexpr double kSatBeta1 = 1.1872431425293139;
inline constexpr double kSatBeta2 = 0.76840986492699281;
inline constexpr double kSatVrr = -2.4095462794828807;
inline constexpr double kSatHessNeg = -2.6811970461906333;

inline Matrix random_symmetric(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = normal(rng);
  }
  return 0.5 * (m + m.transpose());
}

// exp(J K) with K symmetric is symplectic.
inline Matrix random_symplectic(int half_dim, std::mt19937_64& rng, double scale = 0.3) {
  const Matrix j = hambif::standard_symplectic(half_dim);
  const Matrix k = random_symmetric(2 * half_dim, rng, scale);
  return Matrix((j * k).exp());
}

struct NormalForm {
  Matrix a;
  std::vector<double> betas;  // elliptic frequencies, one per elliptic block
  int m_plus = 0;
};

// S^T D S with D assembled from 2x2 blocks on (q_i, p_i): elliptic
// +-beta/2 (q^2 + p^2), hyperbolic mu q p, or saddle-centre mixes. All blocks
// are nondegenerate. `elliptic_only` forces elliptic blocks with random Krein sign.
inline NormalForm random_normal_form(int half_dim, std::mt19937_64& rng, bool elliptic_only = false,
                                     bool distinct = true) {
  std::uniform_real_distribution<double> freq(0.4, 2.2);
  std::uniform_int_distribution<int> kind(0, elliptic_only ? 1 : 3);
  Matrix d = Matrix::Zero(2 * half_dim, 2 * half_dim);
  NormalForm out;
  for (int i = 0; i < half_dim; ++i) {
    const int q = i;
    const int p = half_dim + i;
    double beta = freq(rng);
    if (distinct) {
      // Keep frequencies well separated to avoid near-coincident clusters.
      for (int tries = 0; tries < 100; ++tries) {
        bool ok = true;
        for (double b : out.betas) ok = ok && std::abs(b - beta) > 0.15;
        if (ok) break;
        beta = freq(rng);
      }
    }
    switch (kind(rng)) {
      case 0:  // elliptic, positive definite block
        d(q, q) = d(p, p) = beta;
        out.betas.push_back(beta);
        break;
      case 1:  // elliptic, negative definite block
        d(q, q) = d(p, p) = -beta;
        out.betas.push_back(beta);
        break;
      case 2:  // hyperbolic mu q p, indefinite
        d(q, p) = d(p, q) = beta;
        break;
      default:  // elliptic with unequal weights: (a q^2 + b p^2)/2, frequency sqrt(ab)
      {
        const double r = 0.5 + freq(rng) / 2.0;
        d(q, q) = beta * r;
        d(p, p) = beta / r;
        out.betas.push_back(beta);
        break;
      }
    }
  }
  const Matrix s = random_symplectic(half_dim, rng);
  out.a = s.transpose() * d * s;
  out.a = 0.5 * (out.a + out.a.transpose());
  out.m_plus = hambif::morse_index_positive(out.a);
  return out;
}

// Complete elliptic integral K(k) via the arithmetic-geometric mean.
inline double elliptic_k(double k) {
  double a = 1.0;
  double b = std::sqrt(1.0 - k * k);
  for (int i = 0; i < 60 && std::abs(a - b) > 1e-17 * a; ++i) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return std::numbers::pi / (2.0 * a);
}

// Period of the pendulum q'' = -sin q at energy E = p^2/2 + 1 - cos q.
inline double pendulum_period(double energy) {
  const double k = std::sqrt(energy / 2.0);
  return 4.0 * elliptic_k(k);
}

inline hambif::HamiltonianSystem pendulum() {
  hambif::NewtonianPotential pot;
  pot.dim = 1;
  pot.name = "pendulum";
  pot.potential = [](const Vector& q) { return 1.0 - std::cos(q[0]); };
  pot.gradient = [](const Vector& q) {
    Vector g(1);
    g[0] = std::sin(q[0]);
    return g;
  };
  pot.hessian = [](const Vector& q) {
    Matrix h(1, 1);
    h(0, 0) = std::cos(q[0]);
    return h;
  };
  return hambif::newtonian_to_hamiltonian(pot);
}

// Coefficients c_0..c_4 of ((lambda eta + t)(lambda + t) - 1)^2, expanded by hand.
inline std::vector<double> newtonian_block_polynomial(double eta, double lambda) {
  // (lambda eta + t)(lambda + t) - 1 = t^2 + lambda (eta + 1) t + (lambda^2 eta - 1)
  const double p0 = lambda * lambda * eta - 1.0;
  const double p1 = lambda * (eta + 1.0);
  const double p2 = 1.0;
  return {p0 * p0, 2.0 * p0 * p1, p1 * p1 + 2.0 * p0 * p2, 2.0 * p1 * p2, p2 * p2};
}

// Runs a shell command, capturing stdout; returns the exit status.
inline int run_command(const std::string& cmd, std::string* out = nullptr) {
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return -1;
  std::string text;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) text.append(buf, n);
  const int status = pclose(pipe);
  if (out) *out = text;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace testing
