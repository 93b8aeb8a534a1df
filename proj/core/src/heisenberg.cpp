#include "qumode/heisenberg.hpp"

#include <cmath>

#include "qumode/bigint.hpp"
#include "qumode/polyham.hpp"

namespace qumode {

namespace {

// Affine-or-quadratic substitution images for X_i and P_i under one gate.
template <class C>
struct GateRule {
  // images indexed by quadrature slot: x_img[i], p_img[i]; empty = identity
  std::map<size_t, NormalPoly<C>> x_img;
  std::map<size_t, NormalPoly<C>> p_img;
};

template <class C>
C dyadic(double v) {
  // doubles are exact dyadic rationals
  if constexpr (CoeffOps<C>::exact) {
    BigRat q(v);
    return CoeffOps<C>::from_rat(q);
  } else {
    return C(MpFloat(v));
  }
}

// inverse == false: U O U^dag.  inverse == true: U^dag O U.
template <class C>
GateRule<C> gate_rule(const BosonGate& g, size_t n, bool inverse) {
  using K = BosonGate::Kind;
  using Poly = NormalPoly<C>;
  GateRule<C> r;
  const size_t j = size_t(g.mode);
  const double sgn = inverse ? -1.0 : 1.0;
  auto X = [&](size_t i) { return Poly::x(n, i); };
  auto P = [&](size_t i) { return Poly::p(n, i); };

  switch (g.kind) {
    case K::LinearPhase: {  // P -> P - t
      Poly img = P(j);
      img.add_term({MultiIndex(n), MultiIndex(n)}, -dyadic<C>(sgn * g.param));
      r.p_img[j] = std::move(img);
      break;
    }
    case K::Shear: {  // P -> P - 2 t X
      Poly img = P(j);
      img += X(j) * (-dyadic<C>(2 * sgn * g.param));
      r.p_img[j] = std::move(img);
      break;
    }
    case K::Fourier: {  // X -> P, P -> -X (inverse: X -> -P, P -> X)
      if (!inverse) {
        r.x_img[j] = P(j);
        r.p_img[j] = X(j) * C(-1);
      } else {
        r.x_img[j] = P(j) * C(-1);
        r.p_img[j] = X(j);
      }
      break;
    }
    case K::Cubic: {  // P -> P - s X^2
      Poly x2(Basis::XP, n);
      x2.add_term({MultiIndex::unit(n, j, 2), MultiIndex(n)},
                  -dyadic<C>(sgn * g.param));
      r.p_img[j] = P(j) + x2;
      break;
    }
    case K::Sum: {  // U = exp(-i X_j P_k): X_k -> X_k - X_j, P_j -> P_j + P_k
      const size_t k = size_t(g.mode2);
      r.x_img[k] = X(k) + X(j) * dyadic<C>(-sgn);
      r.p_img[j] = P(j) + P(k) * dyadic<C>(sgn);
      break;
    }
    case K::Displacement: {  // X -> X - sqrt2 Re a, P -> P - sqrt2 Im a
      C sx, sp;
      if constexpr (CoeffOps<C>::exact) {
        sx = C(Root2Rat(BigRat(0), BigRat(-sgn * g.alpha.real())));
        sp = C(Root2Rat(BigRat(0), BigRat(-sgn * g.alpha.imag())));
      } else {
        const MpFloat rt2 = sqrt(MpFloat(2));
        sx = C(-sgn * MpFloat(g.alpha.real()) * rt2);
        sp = C(-sgn * MpFloat(g.alpha.imag()) * rt2);
      }
      Poly xi = X(j);
      xi.add_term({MultiIndex(n), MultiIndex(n)}, sx);
      Poly pi = P(j);
      pi.add_term({MultiIndex(n), MultiIndex(n)}, sp);
      r.x_img[j] = std::move(xi);
      r.p_img[j] = std::move(pi);
      break;
    }
    case K::Rotation: {  // X -> cos X + sin P, P -> -sin X + cos P
      if constexpr (CoeffOps<C>::exact) {
        throw std::invalid_argument(
            "conjugate: general rotations are float-mode only (exact Fourier covers "
            "quarter turns)");
      } else {
        const MpFloat ct = cos(MpFloat(sgn * g.param)), st = sin(MpFloat(sgn * g.param));
        r.x_img[j] = X(j) * C(ct) + P(j) * C(st);
        r.p_img[j] = X(j) * C(-st) + P(j) * C(ct);
      }
      break;
    }
    case K::Squeezing: {  // X -> e^{r} X, P -> e^{-r} P
      if constexpr (CoeffOps<C>::exact) {
        throw std::invalid_argument("conjugate: squeezing is float-mode only");
      } else {
        const MpFloat er = exp(MpFloat(sgn * g.param));
        r.x_img[j] = X(j) * C(er);
        r.p_img[j] = P(j) * C(1 / er);
      }
      break;
    }
    default:
      throw std::invalid_argument("conjugate: gate kind unsupported by the symbolic engine");
  }
  return r;
}

bool exact_capable(const BosonGate& g) {
  using K = BosonGate::Kind;
  switch (g.kind) {
    case K::LinearPhase:
    case K::Shear:
    case K::Fourier:
    case K::Cubic:
    case K::Sum:
    case K::Displacement: return true;
    default: return false;
  }
}

template <class C>
NormalPoly<C> substitute(const NormalPoly<C>& p, const GateRule<C>& rule) {
  const size_t n = p.modes();
  NormalPoly<C> out(Basis::XP, n);
  for (const auto& [key, coeff] : p.terms()) {
    NormalPoly<C> term = NormalPoly<C>::identity(Basis::XP, n);
    // X^mu factors first, then P^nu, in mode order; conjugation preserves
    // the product structure factor by factor.
    for (size_t i = 0; i < n; ++i)
      if (key.mu[i]) {
        auto it = rule.x_img.find(i);
        if (it == rule.x_img.end()) {
          NormalPoly<C> mono(Basis::XP, n);
          mono.add_term({MultiIndex::unit(n, i, key.mu[i]), MultiIndex(n)}, C(1));
          term = term * mono;
        } else {
          term = term * pow(it->second, key.mu[i]);
        }
      }
    for (size_t i = 0; i < n; ++i)
      if (key.nu[i]) {
        auto it = rule.p_img.find(i);
        if (it == rule.p_img.end()) {
          NormalPoly<C> mono(Basis::XP, n);
          mono.add_term({MultiIndex(n), MultiIndex::unit(n, i, key.nu[i])}, C(1));
          term = term * mono;
        } else {
          term = term * pow(it->second, key.nu[i]);
        }
      }
    out += term * coeff;
  }
  out.prune();
  return out;
}

std::string gate_name(const BosonGate& g) {
  using K = BosonGate::Kind;
  switch (g.kind) {
    case K::Rotation: return "rotation(" + std::to_string(g.param) + ")";
    case K::Displacement: return "displacement";
    case K::Squeezing: return "squeezing(" + std::to_string(g.param) + ")";
    case K::Shear: return "shear(" + std::to_string(g.param) + ")";
    case K::LinearPhase: return "linear-phase(" + std::to_string(g.param) + ")";
    case K::Fourier: return "fourier";
    case K::Sum: return "sum(" + std::to_string(g.mode) + "," + std::to_string(g.mode2) + ")";
    case K::Cubic: return "cubic(" + std::to_string(g.param) + ")";
    default: return "gate";
  }
}

SymbolicObservable apply_rule(const SymbolicObservable& obs, const BosonGate& g,
                              bool inverse) {
  SymbolicObservable out = obs;
  const size_t n = obs.modes();
  if (obs.exact() && !exact_capable(g)) {
    // one-way switch to float mode
    out.poly = to_float_poly(std::get<PolyExact>(obs.poly));
  }
  if (std::holds_alternative<PolyExact>(out.poly)) {
    auto rule = gate_rule<CoeffExact>(g, n, inverse);
    out.poly = substitute(std::get<PolyExact>(out.poly), rule);
  } else {
    auto rule = gate_rule<CoeffFloat>(g, n, inverse);
    out.poly = substitute(std::get<PolyFloat>(out.poly), rule);
  }
  out.trail.push_back((inverse ? "adj:" : "") + gate_name(g));
  return out;
}

}  // namespace

SymbolicObservable SymbolicObservable::x(size_t modes, size_t mode) {
  return {PolyExact::x(modes, mode), {}};
}
SymbolicObservable SymbolicObservable::p(size_t modes, size_t mode) {
  return {PolyExact::p(modes, mode), {}};
}
SymbolicObservable SymbolicObservable::number(size_t modes) {
  // sum_i (X_i^2 + P_i^2 - 1)/2
  PolyExact p(Basis::XP, modes);
  const CoeffExact half = CoeffOps<CoeffExact>::from_rat(BigRat(1, 2));
  for (size_t i = 0; i < modes; ++i) {
    p.add_term({MultiIndex::unit(modes, i, 2), MultiIndex(modes)}, half);
    p.add_term({MultiIndex(modes), MultiIndex::unit(modes, i, 2)}, half);
    p.add_term({MultiIndex(modes), MultiIndex(modes)}, -half);
  }
  return {std::move(p), {}};
}
SymbolicObservable SymbolicObservable::from_poly(PolyExact p) {
  if (p.basis() != Basis::XP) p = ladder_to_xp(p);
  return {std::move(p), {}};
}

uint32_t SymbolicObservable::degree() const {
  return std::visit([](const auto& p) { return p.degree(); }, poly);
}
size_t SymbolicObservable::term_count() const {
  return std::visit([](const auto& p) { return p.term_count(); }, poly);
}
size_t SymbolicObservable::modes() const {
  return std::visit([](const auto& p) { return p.modes(); }, poly);
}
bool SymbolicObservable::is_hermitian() const {
  return std::visit([](const auto& p) { return p.is_hermitian(); }, poly);
}

SymbolicObservable conjugate(const SymbolicObservable& obs, const BosonGate& g) {
  return apply_rule(obs, g, /*inverse=*/false);
}

SymbolicObservable conjugate_adjoint(const SymbolicObservable& obs, const BosonGate& g) {
  return apply_rule(obs, g, /*inverse=*/true);
}

namespace {

SymbolicObservable evolve_impl(const BosonCircuit& c, SymbolicObservable obs, bool adjoint) {
  c.validate();
  for (size_t t = 0; t < c.gates.size(); ++t) {
    const BosonGate& g = adjoint ? c.gates[c.gates.size() - 1 - t] : c.gates[t];
    const uint32_t before = obs.degree();
    obs = adjoint ? conjugate_adjoint(obs, g) : conjugate(obs, g);
    const uint32_t after = obs.degree();
    if (g.is_cubic()) {
      if (after > 2 * std::max(before, 1u))
        throw std::logic_error("heisenberg: cubic degree law violated");
    } else if (after > before) {
      // Gaussian rules are affine substitutions; they never raise the degree.
      throw std::logic_error("heisenberg: Gaussian gate raised degree");
    }
  }
  return obs;
}

}  // namespace

SymbolicObservable evolve_observable(const BosonCircuit& c, SymbolicObservable initial) {
  return evolve_impl(c, std::move(initial), /*adjoint=*/false);
}

SymbolicObservable heisenberg_observable(const BosonCircuit& c, SymbolicObservable o) {
  return evolve_impl(c, std::move(o), /*adjoint=*/true);
}

ExpectationValue expectation(const SymbolicObservable& obs, const MultiIndex& occupation) {
  ExpectationValue out;
  if (obs.exact()) {
    PolyExact lad = xp_to_ladder(std::get<PolyExact>(obs.poly));
    out.exact_value = fock_diagonal_expectation(lad, occupation);
    out.is_exact = true;
    out.value = to_cd(out.exact_value);
    const Root2Rat& re = out.exact_value.re;
    out.sign = (re.a == 0 && re.b == 0) ? 0 : (re.to_mpfloat() > 0 ? 1 : -1);
    return out;
  }
  const PolyFloat& p = std::get<PolyFloat>(obs.poly);
  PolyFloat lad = xp_to_ladder(p);
  Cx<MpFloat> acc{MpFloat(0)};
  for (const auto& [k, c] : lad.terms()) {
    if (k.mu != k.nu) continue;
    BigInt w = 1;
    bool dead = false;
    for (size_t i = 0; i < occupation.modes() && !dead; ++i) {
      if (k.mu[i] > occupation[i])
        dead = true;
      else
        w *= falling_factorial(occupation[i], k.mu[i]);
    }
    if (!dead) {
      Cx<MpFloat> t = c;
      t.re *= MpFloat(w);
      t.im *= MpFloat(w);
      acc += t;
    }
  }
  out.value = to_cd(CoeffFloat(acc.re, acc.im));
  out.sign = acc.re == 0 ? 0 : (acc.re > 0 ? 1 : -1);
  return out;
}

ExpectationValue expval_boson_circuit(const BosonCircuit& c, const SymbolicObservable& o,
                                      const std::vector<bool>& x) {
  BosonCircuit full = c;
  full.input_bits.clear();
  if (!x.empty()) {
    if (int(x.size()) != c.n_modes)
      throw std::invalid_argument("expval_boson_circuit: bit string length mismatch");
    // hardwire |x> as a leading displacement layer
    std::vector<BosonGate> prefix;
    for (int i = 0; i < c.n_modes; ++i)
      if (x[i]) prefix.push_back(BosonGate::displacement(1.0, i));
    full.gates.insert(full.gates.begin(), prefix.begin(), prefix.end());
  }
  SymbolicObservable evolved = heisenberg_observable(full, o);
  return expectation(evolved, MultiIndex(size_t(c.n_modes)));
}

std::vector<uint32_t> degree_profile(const BosonCircuit& c) {
  c.validate();
  SymbolicObservable obs = SymbolicObservable::x(size_t(c.n_modes), 0);
  std::vector<uint32_t> profile;
  profile.push_back(obs.degree());
  for (const auto& g : c.gates) {
    obs = conjugate(obs, g);
    profile.push_back(obs.degree());
  }
  return profile;
}

BosonCircuit repeated_squaring_circuit(int rounds, double c) {
  BosonCircuit out;
  out.n_modes = 1;
  for (int t = 0; t < rounds; ++t) {
    out.gates.push_back(BosonGate::fourier(0));
    out.gates.push_back(BosonGate::cubic(3 * c, 0));
  }
  return out;
}

double heisenberg_energy_bound(const BosonCircuit& c) {
  SymbolicObservable n_obs = SymbolicObservable::number(size_t(c.n_modes));
  SymbolicObservable evolved = heisenberg_observable(c, n_obs);

  auto term_bound = [&](const TermKey& k, double mag) {
    // |<0|X^mu P^nu|0>| factorizes over modes
    double m = 1;
    for (size_t i = 0; i < k.mu.modes(); ++i) {
      CoeffExact v = vacuum_moment(k.mu[i], k.nu[i]);
      m *= std::abs(to_cd(v));
    }
    return mag * m;
  };

  double bound = 0;
  if (evolved.exact()) {
    for (const auto& [k, co] : std::get<PolyExact>(evolved.poly).terms())
      bound += term_bound(k, std::abs(to_cd(co)));
  } else {
    for (const auto& [k, co] : std::get<PolyFloat>(evolved.poly).terms())
      bound += term_bound(k, std::abs(to_cd(co)));
  }
  return bound * (1 + 1e-12);
}

}  // namespace qumode
