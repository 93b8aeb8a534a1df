#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "qumode/gaussian.hpp"
#include "qumode/heisenberg.hpp"
#include "qumode/polyham.hpp"

using namespace qumode;

namespace {

std::mt19937 rng(0x4e15);

const PolyExact& as_exact(const SymbolicObservable& o) { return std::get<PolyExact>(o.poly); }

CoeffExact rat(long p, long q = 1) { return CoeffOps<CoeffExact>::from_rat(BigRat(p, q)); }

BosonCircuit random_symbolic_circuit(int n_modes, int gates, int max_cubic) {
  std::uniform_int_distribution<int> kind(0, 4);
  std::uniform_int_distribution<int> mode(0, n_modes - 1);
  std::uniform_int_distribution<int> num(-5, 5);
  BosonCircuit c;
  c.n_modes = n_modes;
  int cubics = 0;
  while (int(c.gates.size()) < gates) {
    const double t = num(rng) / 8.0;
    switch (kind(rng)) {
      case 0: c.gates.push_back(BosonGate::linear_phase(t, mode(rng))); break;
      case 1: c.gates.push_back(BosonGate::shear(t, mode(rng))); break;
      case 2: c.gates.push_back(BosonGate::fourier(mode(rng))); break;
      case 3:
        if (n_modes > 1) {
          int j = mode(rng), k = (j + 1) % n_modes;
          c.gates.push_back(BosonGate::sum(j, k));
          break;
        }
        [[fallthrough]];
      default:
        if (cubics < max_cubic && t != 0) {
          c.gates.push_back(BosonGate::cubic(t));
          ++cubics;
        }
        break;
    }
  }
  return c;
}

}  // namespace

TEST_CASE("single-gate rules match the tabulated transformations") {
  auto X = SymbolicObservable::x(1), P = SymbolicObservable::p(1);

  // X under Fourier -> P
  CHECK(as_exact(conjugate(X, BosonGate::fourier())) == PolyExact::p(1, 0));
  // P under Fourier -> -X
  CHECK(as_exact(conjugate(P, BosonGate::fourier())) == PolyExact::x(1, 0) * rat(-1));
  // P under LinearPhase(t) -> P - t
  auto lp = as_exact(conjugate(P, BosonGate::linear_phase(0.25)));
  CHECK(lp.coeff({{0}, {1}}) == CoeffExact(1));
  CHECK(lp.coeff({{0}, {0}}) == rat(-1, 4));
  // P under Shear(t) -> P - 2t X
  auto sh = as_exact(conjugate(P, BosonGate::shear(0.25)));
  CHECK(sh.coeff({{1}, {0}}) == rat(-1, 2));
  // P under Cubic(3t) -> P - 3t X^2 (the paper's t-parametrized cubic gate)
  auto cu = as_exact(conjugate(P, BosonGate::cubic(3 * 0.125)));
  CHECK(cu.coeff({{2}, {0}}) == rat(-3, 8));
  CHECK(cu.coeff({{0}, {1}}) == CoeffExact(1));
  // X under Cubic -> X
  CHECK(as_exact(conjugate(X, BosonGate::cubic(0.7))) == PolyExact::x(1, 0));
}

TEST_CASE("two rounds of (Fourier; Cubic c) produce the -(3c)^3 X^4 monomial") {
  const double c = 0.5;
  BosonCircuit circ = repeated_squaring_circuit(2, c);
  SymbolicObservable evolved = evolve_observable(circ, SymbolicObservable::x(1));
  const PolyExact& p = as_exact(evolved.poly.index() == 0 ? evolved : evolved);
  const double coeff = to_cd(p.coeff({{4}, {0}})).real();
  CHECK(coeff == doctest::Approx(-std::pow(3 * c, 3)));
}

TEST_CASE("canonical commutator is preserved by every gate rule") {
  std::vector<BosonGate> gates = {
      BosonGate::linear_phase(0.375), BosonGate::shear(-0.25), BosonGate::fourier(),
      BosonGate::cubic(0.5),          BosonGate::sum(0, 1),    BosonGate::displacement(cd(0.5, -0.25)),
  };
  for (const auto& g : gates) {
    const size_t n = 2;
    for (size_t j = 0; j < n; ++j) {
      auto xj = conjugate(SymbolicObservable::x(n, j), g);
      auto pj = conjugate(SymbolicObservable::p(n, j), g);
      PolyExact comm = commutator(as_exact(xj), as_exact(pj));
      PolyExact expect(Basis::XP, n);
      expect.add_term({MultiIndex(n), MultiIndex(n)}, CoeffExact::i());
      CHECK(comm == expect);
    }
  }
  // float-mode gates too
  for (const auto& g : {BosonGate::rotation(0.813), BosonGate::squeezing(0.37)}) {
    auto xf = conjugate(SymbolicObservable::x(1), g);
    auto pf = conjugate(SymbolicObservable::p(1), g);
    PolyFloat comm = commutator(std::get<PolyFloat>(xf.poly), std::get<PolyFloat>(pf.poly));
    auto val = to_cd(comm.coeff({{0}, {0}}));
    CHECK(std::abs(val - cd(0, 1)) < 1e-30);
    CHECK(comm.term_count() == 1);
  }
}

TEST_CASE("exact mode rejects general rotations; conversion to float is one-way") {
  auto X = SymbolicObservable::x(1);
  SymbolicObservable rotated = conjugate(X, BosonGate::rotation(0.3));
  CHECK(!rotated.exact());
  // the float observable keeps evolving through exact-capable gates
  SymbolicObservable further = conjugate(rotated, BosonGate::cubic(0.5));
  CHECK(!further.exact());
  CHECK(further.degree() == 2);
}

TEST_CASE("evolve_observable: empty circuit and degree law") {
  BosonCircuit empty;
  empty.n_modes = 1;
  auto out = evolve_observable(empty, SymbolicObservable::x(1));
  CHECK(as_exact(out) == PolyExact::x(1, 0));

  for (int trial = 0; trial < 6; ++trial) {
    BosonCircuit c = random_symbolic_circuit(2, 6, 2);
    auto profile = degree_profile(c);
    uint32_t prev = profile[0];
    size_t gi = 0;
    for (size_t t = 1; t < profile.size(); ++t, ++gi) {
      if (c.gates[gi].is_cubic())
        CHECK(profile[t] <= 2 * std::max(prev, 1u));
      else
        CHECK(profile[t] <= prev);
      prev = profile[t];
    }
  }

  // all-Gaussian circuit keeps the degree at 1
  BosonCircuit gauss = random_symbolic_circuit(2, 8, 0);
  auto prof = degree_profile(gauss);
  for (auto d : prof) CHECK(d == 1);
}

TEST_CASE("repeated squaring reaches degree 2^T") {
  BosonCircuit c2 = repeated_squaring_circuit(2, 0.5);
  CHECK(degree_profile(c2).back() == 4);
  BosonCircuit c5 = repeated_squaring_circuit(5, 0.5);
  SymbolicObservable evolved = evolve_observable(c5, SymbolicObservable::x(1));
  CHECK(evolved.degree() == 32);
  CHECK(!as_exact(evolved).coeff({{32}, {0}}).is_zero());
}

TEST_CASE("expectation closed forms") {
  auto X = SymbolicObservable::x(1);
  CHECK(expectation(X, MultiIndex{0}).value == cd(0, 0));

  SymbolicObservable x2 = SymbolicObservable::from_poly([] {
    PolyExact p(Basis::XP, 1);
    p.add_term({{2}, {0}}, CoeffExact(1));
    return p;
  }());
  auto e = expectation(x2, MultiIndex{0});
  CHECK(e.is_exact);
  CHECK(e.value.real() == doctest::Approx(0.5));
  CHECK(e.sign == 1);

  // displacement circuit: <0|C^dag X C|0> equals the phase-space mean
  const double t = 0.75;
  BosonCircuit c;
  c.n_modes = 1;
  c.gates.push_back(BosonGate::linear_phase(t));  // exp(itX) shifts P, not X
  c.gates.push_back(BosonGate::fourier());        // swap so X picks up the shift
  auto ev = expval_boson_circuit(c, SymbolicObservable::x(1), {});
  // phase-space oracle
  GaussianCircuit gc;
  gc.n_modes = 1;
  QuadHamPhase h = QuadHamPhase::zero(1);
  h.d << t, 0;
  gc.gates.push_back({h, 1.0});
  QuadHamPhase rot{Mat::Identity(2, 2), Vec::Zero(2)};
  gc.gates.push_back({rot, M_PI / 2});  // H = r^T r/2 over pi/2 is the Fourier quarter turn
  auto st = run_circuit(gc);
  CHECK(ev.value.real() == doctest::Approx(st.mu(0)).epsilon(1e-12));
}

TEST_CASE("expval_boson_circuit basics") {
  BosonCircuit id;
  id.n_modes = 1;
  CHECK(expval_boson_circuit(id, SymbolicObservable::x(1), {false}).value == cd(0, 0));

  // O = N on a displaced input bit: coherent |1> has <N> = 1
  auto n_obs = SymbolicObservable::number(1);
  auto e = expval_boson_circuit(id, n_obs, {true});
  CHECK(e.value.real() == doctest::Approx(1.0));
  CHECK(e.is_exact);

  // O = X is invariant under a cubic-only circuit
  BosonCircuit cub;
  cub.n_modes = 1;
  cub.gates.push_back(BosonGate::cubic(0.625));
  auto ex = expval_boson_circuit(cub, SymbolicObservable::x(1), {false});
  CHECK(ex.value == cd(0, 0));
  CHECK(ex.sign == 0);
}

TEST_CASE("cross-backend: symbolic expectation equals the Fock engine") {
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 1 + trial % 2;
    BosonCircuit c = random_symbolic_circuit(n, 4, 1);
    auto sym = expval_boson_circuit(c, SymbolicObservable::x(size_t(n)), {});

    const int cutoff = 48 / n;
    RunResult r = run_circuit_fock(c, cutoff);
    oracle::Mat xmat = oracle::quad_x(cutoff + 1);
    // <psi| X_1 |psi> through the dense sector state
    cd acc = 0;
    const auto& basis = *r.state.basis;
    for (int i = 0; i < basis.dim(); ++i) {
      MultiIndex mi = basis.state(i);
      for (int v = 0; v <= basis.cutoff(); ++v) {
        MultiIndex mj = mi;
        mj[0] = uint32_t(v);
        const int j = basis.index(mj);
        if (j >= 0 && xmat(v, mi[0]) != cd(0))
          acc += std::conj(r.state.amp(j)) * xmat(v, mi[0]) * r.state.amp(i);
      }
    }
    CHECK(std::abs(sym.value - acc) < 5e-4);
  }
}

TEST_CASE("hermiticity survives evolution (real anticommutator coefficients)") {
  BosonCircuit c = random_symbolic_circuit(1, 5, 2);
  SymbolicObservable evolved = evolve_observable(c, SymbolicObservable::x(1));
  CHECK(evolved.is_hermitian());
  PolyExact anti = to_anticommutator(as_exact(evolved));
  for (const auto& [k, co] : anti.terms()) CHECK(co.is_real());
}

TEST_CASE("heisenberg_energy_bound dominates the exact expectation") {
  // The l1-style bound cannot see cancellations inside N itself, so even the
  // identity circuit reports 1 (= sum of |coeff| x |vacuum moment| over N's
  // three monomials); it still dominates the exact value 0.
  BosonCircuit id;
  id.n_modes = 1;
  CHECK(heisenberg_energy_bound(id) >= 0.0);
  CHECK(heisenberg_energy_bound(id) <= 1.0 + 1e-9);

  // displacement alpha: bound >= |alpha|^2
  BosonCircuit d;
  d.n_modes = 1;
  d.gates.push_back(BosonGate::displacement(cd(0.8, 0.3)));
  const double a2 = std::norm(cd(0.8, 0.3));
  CHECK(heisenberg_energy_bound(d) >= a2 - 1e-12);

  // two cubic rounds: bound finite and >= the Fock value
  BosonCircuit c = repeated_squaring_circuit(2, 0.25);
  const double bound = heisenberg_energy_bound(c);
  RunResult r = run_circuit_fock(c, 64);
  CHECK(bound >= r.state.mean_particle_number() - 1e-6);
  CHECK(std::isfinite(bound));
}

TEST_CASE("term budget aborts with a useful exception") {
  size_t old = term_budget();
  set_term_budget(200);
  BosonCircuit c = repeated_squaring_circuit(6, 0.5);
  CHECK_THROWS_AS(evolve_observable(c, SymbolicObservable::x(1)), BudgetExceeded);
  set_term_budget(old);
}
