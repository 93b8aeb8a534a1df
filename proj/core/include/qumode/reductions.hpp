#pragma once

#include <Eigen/Sparse>

#include "qumode/gaussian.hpp"

namespace qumode {

/// Truncated-Taylor discretization parameters for one circuit.
struct OdeParameters {
  double h = 0;  // time step, h * |M_i| <= 1 for every segment
  int k = 0;     // Taylor order, (k+1)! >= tau e^3/(h eps) (E* + tau e^2 |d|)
};

/// Block linear system A x = b encoding the mean-trajectory ODE
/// mu' = Omega M mu + Omega d. Unknowns are indexed (time step j, Taylor
/// level l, quadrature) with A = I - L, L strictly block lower triangular.
struct OdeLinearSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  int n_modes = 0;
  int steps = 0;        // m' = number of time steps
  int taylor_order = 0; // k
  double h = 0;
  std::vector<double> step_times;  // absolute time after each step
  double kappa_bound = 0;          // declared O(E* tau m') bound (with C = 1)

  int block_dim() const { return 2 * n_modes; }
  int index(int step, int level, int q) const {
    return (step * (taylor_order + 1) + level) * block_dim() + q;
  }
};

OdeParameters choose_parameters(const GaussianCircuit& c, double eps);

/// Build the sparse encoding; size cap guards runaway discretizations.
OdeLinearSystem encode_linear_system(const GaussianCircuit& c, const OdeParameters& p,
                                     size_t max_unknowns = 2'000'000);

/// Solve A x = b and read the level-0 block of every retained time step.
std::vector<Vec> decode_trajectory(const OdeLinearSystem& sys);

/// kappa(A): dense SVD below 4000 unknowns, power/inverse iteration above.
double condition_estimate(const OdeLinearSystem& sys);

/// Closed form of (I - N_1)^{-1} on Taylor levels:
/// block (l + l', l) = l! (Omega M h)^{l'} / (l + l')!.
Mat taylor_ladder_inverse_block(const Mat& omega_m_h, int k, int l_from, int l_to);

/// Matrix inversion through Gaussian dynamics.
struct InversionJob {
  Mat a;           // square, invertible, general real
  int i = 0;       // target entry row
  int j = 0;       // target entry column
  double delta = 0.05;
  double kappa_cap = 1e6;
};

struct InversionResult {
  double estimate = 0;       // ~ (A^{-1})_{ij}
  int chunks = 0;            // N
  double epsilon = 0;        // chunk time step = 1/s_max
  double kappa = 0;          // measured condition number
  double max_energy = 0;     // sup over chunk grid of the Gaussian energy
  double energy_bound = 0;   // |A^{-1}| + n_modes/2 + delta-slack bound
};

/// Embeds A antisymmetrically as [[0, A], [-A^T, 0]], runs the induced
/// Gaussian dynamics for N = ceil(4 kappa / delta) chunk times t_l = l eps,
/// and averages the mean component; |estimate - (A^{-1})_{ij}| <=
/// delta |A^{-1}| up to solver round-off.
InversionResult invert_via_gaussian(const InversionJob& job);

/// Max averaged-propagator norm |(1/N) sum_{k<N} exp(eps A k)| for
/// antisymmetric A; the averaging lemma guarantees <= delta at
/// eps = 1/s_max, N = ceil(4 kappa / delta).
double averaged_propagator_norm(const Mat& antisym, double eps, int chunks);

struct EnergyEnvelopeReport {
  double max_observed = 0;
  double bound = 0;
  bool within_bound = false;
};

/// Simulated energy at the chunk grid vs the stated envelope.
EnergyEnvelopeReport verify_energy_envelope(const InversionJob& job);

}  // namespace qumode
