#pragma once

#include <string>
#include <variant>
#include <vector>

#include "qumode/fock.hpp"
#include "qumode/polyham.hpp"
#include "qumode/normal_poly.hpp"

namespace qumode {

/// Observable in XP normal form carried through Heisenberg conjugation.
/// Exact coefficients (Q[i, sqrt2]) survive the gate set {LinearPhase, Shear,
/// Fourier, Cubic, Sum, Displacement}; a Rotation or Squeezing gate switches
/// the observable to arbitrary-precision float mode, once, explicitly.
struct SymbolicObservable {
  std::variant<PolyExact, PolyFloat> poly;
  std::vector<std::string> trail;  // names of the gates applied so far

  static SymbolicObservable x(size_t modes, size_t mode = 0);
  static SymbolicObservable p(size_t modes, size_t mode = 0);
  static SymbolicObservable number(size_t modes);  // sum_i N_i
  static SymbolicObservable from_poly(PolyExact p);

  bool exact() const { return std::holds_alternative<PolyExact>(poly); }
  uint32_t degree() const;
  size_t term_count() const;
  size_t modes() const;
  bool is_hermitian() const;
};

/// U_g O U_g^dag for the gate's fixed unitary convention (see fock.hpp).
SymbolicObservable conjugate(const SymbolicObservable& obs, const BosonGate& g);

/// Inverse-direction map U_g^dag O U_g (used to assemble C^dag O C).
SymbolicObservable conjugate_adjoint(const SymbolicObservable& obs, const BosonGate& g);

/// C O C^dag with C = g_T ... g_1 (gates applied in circuit order). Checks
/// the degree law along the way: Gaussian rules keep the degree, a cubic
/// gate at most doubles it.
SymbolicObservable evolve_observable(const BosonCircuit& c, SymbolicObservable initial);

/// C^dag O C: the observable whose input-state expectation is the physical
/// output expectation of the circuit.
SymbolicObservable heisenberg_observable(const BosonCircuit& c, SymbolicObservable o);

/// <k_1...k_n| obs |k_1...k_n>; exact in exact mode.
struct ExpectationValue {
  std::complex<double> value;
  CoeffExact exact_value;  // meaningful only when is_exact
  bool is_exact = false;
  int sign = 0;  // sign of the real part (certified in exact mode)
};
ExpectationValue expectation(const SymbolicObservable& obs, const MultiIndex& occupation);

/// <x| C^dag O C |x> for a bit string x hardwired as a displacement layer.
ExpectationValue expval_boson_circuit(const BosonCircuit& c, const SymbolicObservable& o,
                                      const std::vector<bool>& x);

/// deg(O_t) after every gate, evolving X_1 forward.
std::vector<uint32_t> degree_profile(const BosonCircuit& c);

/// T rounds of (Fourier; Cubic(3c)): the evolved X picks up an X^{2^T}
/// monomial with nonzero coefficient.
BosonCircuit repeated_squaring_circuit(int rounds, double c);

/// Rigorous bound sum |alpha_{mu,nu}| |<0|X^mu P^nu|0>| >= |<0|C^dag N C|0>|.
double heisenberg_energy_bound(const BosonCircuit& c);

}  // namespace qumode
