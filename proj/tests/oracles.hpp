#pragma once

// Test-only oracles, independent of the symbolic engine: dense truncated
// Fock-space matrices for X, P, ladder operators, and matrix builders for
// normal-form polynomials. Everything here goes through plain Eigen linear
// algebra so it exercises none of the code paths it checks.

#include <Eigen/Dense>
#include <complex>
#include <random>

#include "qumode/normal_poly.hpp"

namespace oracle {

using Mat = Eigen::MatrixXcd;
using cd = std::complex<double>;

inline Mat ladder_a(int dim) {
  Mat m = Mat::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) m(n - 1, n) = std::sqrt(double(n));
  return m;
}

inline Mat ladder_adag(int dim) { return ladder_a(dim).adjoint(); }

inline Mat quad_x(int dim) {
  return (ladder_a(dim) + ladder_adag(dim)) / std::sqrt(2.0);
}

inline Mat quad_p(int dim) {
  return (ladder_a(dim) - ladder_adag(dim)) * cd(0, -1) / std::sqrt(2.0);
}

inline Mat matpow(const Mat& m, unsigned k) {
  Mat r = Mat::Identity(m.rows(), m.cols());
  for (unsigned i = 0; i < k; ++i) r = r * m;
  return r;
}

// Dense matrix of a single-mode normal-form polynomial at the given cutoff.
template <class C>
Mat poly_matrix_1mode(const qumode::NormalPoly<C>& p, int dim) {
  using qumode::Basis;
  REQUIRE(p.modes() == 1);
  Mat r = Mat::Zero(dim, dim);
  const Mat x = quad_x(dim), pp = quad_p(dim), a = ladder_a(dim), ad = ladder_adag(dim);
  for (const auto& [k, c] : p.terms()) {
    Mat term;
    if (p.basis() == Basis::XP)
      term = matpow(x, k.mu[0]) * matpow(pp, k.nu[0]);
    else if (p.basis() == Basis::Ladder)
      term = matpow(ad, k.nu[0]) * matpow(a, k.mu[0]);
    else {
      Mat xm = matpow(x, k.mu[0]), pn = matpow(pp, k.nu[0]);
      term = 0.5 * (xm * pn + pn * xm);
    }
    r += qumode::to_cd(c) * term;
  }
  return r;
}

// Same for n modes; dimension dim^n with mode 0 slowest.
template <class C>
Mat poly_matrix(const qumode::NormalPoly<C>& p, int dim) {
  using qumode::Basis;
  const int n = int(p.modes());
  int total = 1;
  for (int i = 0; i < n; ++i) total *= dim;
  Mat r = Mat::Zero(total, total);
  const Mat x = quad_x(dim), pp = quad_p(dim), a = ladder_a(dim), ad = ladder_adag(dim);
  auto kron = [](const Mat& A, const Mat& B) {
    Mat K(A.rows() * B.rows(), A.cols() * B.cols());
    for (int i = 0; i < A.rows(); ++i)
      for (int j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
  };
  for (const auto& [k, c] : p.terms()) {
    Mat term = Mat::Identity(1, 1);
    for (int i = 0; i < n; ++i) {
      Mat f;
      if (p.basis() == Basis::XP)
        f = matpow(x, k.mu[i]) * matpow(pp, k.nu[i]);
      else
        f = matpow(ad, k.nu[i]) * matpow(a, k.mu[i]);
      term = kron(term, f);
    }
    r += qumode::to_cd(c) * term;
  }
  return r;
}

inline Eigen::VectorXcd vacuum(int dim) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  v(0) = 1.0;
  return v;
}

}  // namespace oracle
