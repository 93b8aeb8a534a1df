#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <variant>
#include <vector>

#include "qumode/multi_index.hpp"
#include "qumode/normal_poly.hpp"

namespace qumode {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Enumeration of Fock multi-indices with total particle number <= cutoff.
class FockBasis {
 public:
  FockBasis(int n_modes, int cutoff);

  int n_modes() const { return n_modes_; }
  int cutoff() const { return cutoff_; }
  int dim() const { return int(states_.size()); }
  const MultiIndex& state(int i) const { return states_[i]; }
  /// -1 when the index falls outside the sector.
  int index(const MultiIndex& m) const;

 private:
  int n_modes_;
  int cutoff_;
  std::vector<MultiIndex> states_;
  std::map<std::vector<uint32_t>, int> lookup_;
};

std::shared_ptr<const FockBasis> shared_basis(int n_modes, int cutoff);

struct BosonGate {
  enum class Kind {
    Rotation,     // exp(i theta N)
    Displacement, // exp(alpha adag - conj(alpha) a)
    Squeezing,    // exp(r (a^2 - adag^2)/2)
    Shear,        // exp(i t X^2)
    LinearPhase,  // exp(i t X)
    Fourier,      // exp(i pi/4 (X^2 + P^2))
    Sum,          // exp(-i X_j P_k)
    Cubic,        // exp(i s X^3 / 3); s != 0 is the non-Gaussian gate
    PolyHam,      // exp(+i H t) for a normal-form Hamiltonian
    SigmaX,       // exp(i theta sigma_x_bar), sigma_x_bar = (I - adag a) a + h.c.
    SigmaZ,       // exp(i theta sigma_z_bar), sigma_z_bar = I - 2 adag a
    SigmaZZ,      // exp(i theta sigma_z_bar (x) sigma_z_bar)
  };

  Kind kind = Kind::Rotation;
  double param = 0;          // theta / r / t / s
  cd alpha;                  // Displacement only
  int mode = 0;
  int mode2 = -1;            // Sum / SigmaZZ target
  std::shared_ptr<const PolyExact> ham;  // PolyHam only
  double time = 0;                        // PolyHam only

  bool is_gaussian() const;
  bool is_cubic() const { return kind == Kind::Cubic && param != 0; }

  static BosonGate rotation(double theta, int mode = 0);
  static BosonGate displacement(cd alpha, int mode = 0);
  static BosonGate squeezing(double r, int mode = 0);
  static BosonGate shear(double t, int mode = 0);
  static BosonGate linear_phase(double t, int mode = 0);
  static BosonGate fourier(int mode = 0);
  static BosonGate sum(int j, int k);
  static BosonGate cubic(double s, int mode = 0);
  static BosonGate poly_ham(PolyExact h, double t);
  static BosonGate sigma_x(double theta, int mode = 0);
  static BosonGate sigma_z(double theta, int mode = 0);
  static BosonGate sigma_zz(double theta, int j, int k);
};

struct BosonCircuit {
  int n_modes = 1;
  std::vector<BosonGate> gates;
  /// Input |x> as a layer of unit displacements on the marked modes
  /// (coherent bit-string input); empty means vacuum.
  std::vector<bool> input_bits;

  void validate() const;
  size_t cubic_count() const;
};

/// Dense state over the <=E total-particle sector with a running error
/// certificate. The bound only grows along a circuit.
struct FockVector {
  std::shared_ptr<const FockBasis> basis;
  CVec amp;
  double err_bound = 0;

  static FockVector vacuum(int n_modes, int cutoff);
  double norm() const { return amp.norm(); }
  /// <sum_i N_i>, normalized by the state norm.
  double mean_particle_number() const;
  cd amplitude(const MultiIndex& m) const;
};

/// Single-mode gate matrix plus a truncation-leak estimate, measured as the
/// worst column-norm defect over the lower half of the sector.
struct GateMatrix {
  CMat u;
  double leak_bound = 0;
};

GateMatrix rotation_matrix(double theta, int cutoff);
GateMatrix displacement_matrix(cd alpha, int cutoff);
GateMatrix squeezing_matrix(double r, int cutoff);
GateMatrix fourier_matrix(int cutoff);
/// exp(i t X^2) from a padded generator exponential.
GateMatrix shear_matrix(double t, int cutoff, int pad = 32);

/// Cubic phase gate exp(i s X^3/3) from the Hermite/Airy closed form, with a
/// per-entry certified truncation error (max over entries reported).
struct CubicMatrix {
  CMat u;
  double entry_error = 0;  // max certified per-entry truncation error
  double leak_bound = 0;
};
CubicMatrix cubic_matrix(double s, int cutoff, unsigned precision_bits = 0);

/// Two-mode SUM = exp(-i X_j P_k) on the product sector (cutoff+1)^2,
/// built from a padded generator exponential; mode j slow, mode k fast.
GateMatrix sum_gate_matrix(int cutoff, int pad = 16);

/// Apply one gate, truncated to the vector's sector; updates the error bound
/// by the per-step estimate sqrt(2 E_step / E) with the measured energy.
FockVector apply_gate(const FockVector& psi, const BosonGate& g);

struct RunResult {
  FockVector state;
  std::vector<double> step_energies;  // <N> after every gate (and at input)
  double max_energy = 0;
};

RunResult run_circuit_fock(const BosonCircuit& c, int cutoff);

/// T sqrt(2 E* / E).
double cutoff_error(int gate_count, double energy_star, int cutoff);

/// Smallest cutoff (doubling search) with certified error <= eps and a
/// doubling-stability check below eps/4 in total variation.
struct CutoffChoice {
  int cutoff = 0;
  double certified_error = 0;
  double measured_energy = 0;
};
CutoffChoice choose_cutoff(const BosonCircuit& c, double eps, int max_cutoff = 512);

/// Feynman path sum over intermediate sector states; equals the
/// matrix-product amplitude for the same truncated gates.
cd amplitude_feynman(const BosonCircuit& c, const MultiIndex& out, const MultiIndex& in,
                     int cutoff, size_t path_budget = 20'000'000);

/// Marginal number distribution of one mode.
std::vector<double> number_distribution(const FockVector& psi, int mode);

enum class CvbqpAnswer : uint8_t { Accept, Reject };

/// Accept when P(outcome in [b, b+window]) > 2/3, reject when
/// P(outcome in [a-window, a]) > 2/3; PromiseViolated otherwise.
CvbqpAnswer decide_cvbqp(const FockVector& psi, double a, double b, double window,
                         int mode = 0);

/// Qubit-sector view of an embedding circuit's output.
struct QubitExtraction {
  CVec qubit_amplitudes;  // 2^n, bit i of the index = occupation of mode i
  double sector_leak = 0; // probability weight outside the {0,1} sector
};
QubitExtraction extract_qubit_sector(const FockVector& psi);

}  // namespace qumode
