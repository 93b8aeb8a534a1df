#pragma once

#include <Eigen/Dense>
#include <optional>

#include "qumode/normal_poly.hpp"
#include "qumode/sdp.hpp"

namespace qumode {

/// Quadratic ladder Hamiltonian
///   H = sum h1_ij a_i adag_j + h2_ij a_i a_j + conj(h2)_ij adag_i adag_j
///     + sum h3_i a_i + conj(h3)_i adag_i
/// with h1 Hermitian and h2 symmetric.
struct QuadLadderHam {
  Eigen::MatrixXcd h1;
  Eigen::MatrixXcd h2;
  Eigen::VectorXcd h3;

  int n_modes() const { return int(h3.size()); }
  void validate() const;
  /// As an exact ladder polynomial (coefficients rationalized from doubles).
  PolyExact to_poly() const;
};

struct SingleModeGround {
  bool bounded = false;
  double energy = 0;   // 1/2 (sqrt(beta^2 - 4|alpha|^2) - beta)
  std::complex<double> a_star;  // optimal stellar parameter, b* = 0
};

/// H = alpha a^2 + conj(alpha) adag^2 + beta adag a; bounded iff beta > 2|alpha|.
SingleModeGround single_mode_ground(std::complex<double> alpha, double beta);

struct BoundednessReport {
  bool bounded = false;
  double min_eig = 0;                    // certificate: lambda_min of the realified form
  Eigen::MatrixXd certificate;           // the 2n x 2n realified matrix
  Eigen::VectorXcd coherent_ray;         // unbounded only: <Kz|H|Kz> -> -inf along K
};

/// Realified PSD test (Lemma "symmetric vs hermitian"); strict positivity is
/// required (the marginal boundary is reported Unbounded, matching the
/// single-mode proposition's strict inequality).
BoundednessReport boundedness_check(const QuadLadderHam& h);

/// Simultaneous block reduction of (h1~, h2~J) through the K-pairing of
/// eigenvectors; Q is diagonal >= 0.
struct RealifiedPair {
  Eigen::MatrixXd p;
  Eigen::MatrixXd q;
};
RealifiedPair realified_pair(const QuadLadderHam& h);

struct GaussianGroundResult {
  double energy = 0;
  Eigen::MatrixXd x_opt;        // SDP variable at the optimum
  Eigen::VectorXcd c_opt;       // optimal linear-part parameter
  double gap_estimate = 0;
};

/// Ground energy over Gaussian states:
///   E = 1/4 [tr((P-2Q)X*) + tr((P+2Q)X*^{-1})] + tr(P)/2 + linear part,
/// via the log-barrier Newton solver on X > I.
GaussianGroundResult gaussian_ground_energy(const QuadLadderHam& h, double tol = 1e-9);

/// Stellar-function parameters of a pure Gaussian state
/// F(z) ~ exp(-1/2 z^T A z + b^T z), A = U^T D U (Takagi), 0 <= D < I.
struct GaussianStellarParams {
  Eigen::MatrixXcd a;  // complex symmetric
  Eigen::VectorXcd b;

  int n_modes() const { return int(b.size()); }
};

/// Takagi factorization A = U^T D U with U unitary, D diagonal >= 0.
struct TakagiFactors {
  Eigen::MatrixXcd u;
  Eigen::VectorXd d;
};
TakagiFactors takagi(const Eigen::MatrixXcd& a);

/// Derived displacement moment c = U^T (I-D^2)^{-1} (conj(U) b - D U conj(b)).
Eigen::VectorXcd stellar_c(const GaussianStellarParams& params);

/// <psi| H |psi> for a ladder-normal H of degree <= 4, from the closed-form
/// moment generating function of the stellar parameters.
double gaussian_expectation(const PolyExact& ladder_h, const GaussianStellarParams& params);

/// Coherent expectation: substitute adag -> conj(z), a -> z in creation-left
/// normal form. Exact for exact inputs.
CoeffExact coherent_expectation(const PolyExact& ladder_h,
                                const std::vector<CoeffExact>& z);
double coherent_expectation_d(const PolyExact& ladder_h, const Eigen::VectorXcd& z);

/// Sum-of-squares witness for a Hermitian XP Hamiltonian of degree <= 4:
/// H = sum_i G_i^2 + shift * I with a PSD Gram matrix over the degree-<=2
/// monomial basis. The shift is exact (rational) whenever the Gram matrix
/// rationalizes; the remainder is symbolically checked to be a multiple of I.
struct SosWitness {
  Eigen::MatrixXd gram;               // PSD over the monomial basis
  std::vector<PolyExact> squares;     // operator versions G_i (float-rounded coefficients)
  double shift = 0;                   // H >= shift
  bool exact = false;                 // shift certified by exact arithmetic
  BigRat exact_shift;                 // meaningful when exact
};
std::optional<SosWitness> sos_witness(const PolyExact& h_xp);

/// H = sum_ij M_ij N_i N_j (number-diagonal gadget).
PolyExact copositivity_gadget(const Eigen::MatrixXd& m);

/// min over the box {0..K}^n of <m|H|m> for a number-diagonal H; exact.
BigRat fock_box_min(const PolyExact& h_ladder, int box);

/// Integer polynomial in n variables: exponent vector -> coefficient.
struct IntPoly {
  size_t n_vars = 1;
  std::map<std::vector<uint32_t>, BigInt> terms;

  BigInt eval(const std::vector<BigInt>& x) const;
  IntPoly squared() const;
};

/// H = P^2(N_1..N_n) as a ladder polynomial.
PolyExact hilbert_gadget(const IntPoly& p);

/// Exact spectrum {P^2(m) : m in box}; minimum is 0 iff P has a root there.
struct BoxSpectrum {
  BigInt min_value;
  std::vector<uint32_t> argmin;
};
BoxSpectrum spectrum_box(const IntPoly& p, int box);

}  // namespace qumode
