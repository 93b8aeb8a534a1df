#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "qumode/errors.hpp"

namespace qumode {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Symplectic form Omega = [[0, -I], [I, 0]] on 2n quadratures (X_1..X_n,
/// P_1..P_n ordering).
Mat symplectic_form(int n_modes);

/// Quadratic Hamiltonian H = 1/2 r^T M r + d.r in phase-space form.
/// The associated gate for time t is exp(+i H t); with this pairing the
/// covariance/mean evolution below holds verbatim.
struct QuadHamPhase {
  Mat M;  // real symmetric 2n x 2n
  Vec d;  // real 2n

  int n_modes() const { return int(d.size()) / 2; }
  void validate() const;

  static QuadHamPhase zero(int n_modes);
};

struct GaussianGate {
  QuadHamPhase h;
  double t = 0;  // strictly positive evolution time
};

struct GaussianCircuit {
  int n_modes = 0;
  std::vector<GaussianGate> gates;

  double total_time() const;
  void validate() const;
};

struct GaussianState {
  Mat sigma;  // covariance, symmetric positive definite
  Vec mu;     // mean

  int n_modes() const { return int(mu.size()) / 2; }

  static GaussianState vacuum(int n_modes);

  /// Largest violation of sigma + i Omega/2 >= 0 (0 when satisfied).
  double uncertainty_defect() const;
};

/// S = exp(Omega M t); the symplectic defect |S^T Omega S - Omega| stays
/// below ~1e-9 |S|^2 for the circuit sizes this library targets.
Mat symplectic_exp(const QuadHamPhase& h, double t);

/// One Hamiltonian segment: sigma' = S sigma S^T,
/// mu' = S mu + (Omega M)^{-1} (S - I) Omega d, with a convergent-series
/// fallback sum_{l>=1} (Omega M t)^{l-1} t/l! Omega d when Omega M is
/// (near-)singular.
GaussianState evolve(const GaussianState& state, const QuadHamPhase& h, double t);

/// Run from the vacuum.
GaussianState run_circuit(const GaussianCircuit& c);

/// <sum_i N_i> = (tr sigma + |mu|^2)/2 - n/2.
double energy(const GaussianState& state);

/// max over a time grid (grid_points per segment, endpoints included) of the
/// energy along the evolution; a lower estimate of the true supremum that
/// converges under grid refinement.
double energy_bound(const GaussianCircuit& c, int grid_points = 64);

/// (mean, variance) of a position measurement of the first mode.
struct OutputDistribution {
  double mean = 0;
  double variance = 0;
};
OutputDistribution output_distribution(const GaussianState& state);

enum class GausSimAnswer : uint8_t { Yes, No };

/// YES if the output mean is >= b, NO if <= a; PromiseViolated otherwise.
GausSimAnswer decide_gausim(const GaussianCircuit& c, double a, double b);

/// Beam-splitter binary tree combining 2^r equal-mode-count circuits into one
/// whose first-mode sample has the distribution of (Z_1+...+Z_{2^r})/2^{r/2}.
GaussianCircuit sample_mean_combine(const std::vector<GaussianCircuit>& circuits);

/// 50:50 beam splitter between modes i and j as a Gaussian gate
/// (X_i -> (X_i + X_j)/sqrt(2)).
GaussianGate beam_splitter_gate(int n_modes, int i, int j);

/// Draw one position sample of the first mode; reproducible per seed.
double sample(const GaussianState& state, uint64_t seed);

}  // namespace qumode
