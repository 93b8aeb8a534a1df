#include "qumode/normal_poly.hpp"

#include <atomic>

#include "qumode/bigint.hpp"

namespace qumode {

namespace {
std::atomic<size_t> g_term_budget{10'000'000};
}

void set_term_budget(size_t max_terms) { g_term_budget = max_terms; }
size_t term_budget() { return g_term_budget; }

std::string basis_name(Basis b) {
  switch (b) {
    case Basis::XP: return "xp-normal";
    case Basis::Ladder: return "ladder-normal";
    case Basis::Anti: return "anticommutator";
  }
  return "?";
}

Basis basis_from_name(const std::string& s) {
  if (s == "xp-normal") return Basis::XP;
  if (s == "ladder-normal") return Basis::Ladder;
  if (s == "anticommutator") return Basis::Anti;
  throw std::invalid_argument("unknown basis tag: " + s);
}

template <class C>
NormalPoly<C> NormalPoly<C>::adjoint() const {
  NormalPoly<C> r(basis_, modes_);
  if (basis_ == Basis::Ladder) {
    // (adag^nu a^mu)^dag = adag^mu a^nu: swap the key, conjugate the coefficient.
    for (const auto& [k, c] : terms_) r.add_term({k.nu, k.mu}, c.conj());
    return r;
  }
  if (basis_ == Basis::Anti) {
    // Anticommutator monomials are Hermitian.
    for (const auto& [k, c] : terms_) r.add_term(k, c.conj());
    return r;
  }
  // XP: (X^mu P^nu)^dag = P^nu X^mu, which needs reordering.
  for (const auto& [k, c] : terms_) {
    NormalPoly<C> mono(Basis::XP, modes_);
    mono.add_term({k.mu, MultiIndex(modes_)}, c.conj());
    NormalPoly<C> pnu(Basis::XP, modes_);
    pnu.add_term({MultiIndex(modes_), k.nu}, C(1));
    r += normal_order_mul(pnu, mono);
  }
  return r;
}

template <>
void NormalPoly<CoeffExact>::prune() {}

template <>
void NormalPoly<CoeffFloat>::prune() {
  if (terms_.empty()) return;
  MpFloat maxn2{0};
  for (const auto& [k, c] : terms_) {
    MpFloat n2 = c.norm2();
    if (n2 > maxn2) maxn2 = n2;
  }
  const MpFloat cut = maxn2 * MpFloat("1e-60");  // (1e-30 relative)^2
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (it->second.norm2() < cut)
      it = terms_.erase(it);
    else
      ++it;
  }
}

namespace {

// Reordering weights. XP:    P^b X^c = sum_l (-i)^l l! C(b,l) C(c,l) X^{c-l} P^{b-l}
//                     ladder: a^b adag^c = sum_l l! C(b,l) C(c,l) adag^{c-l} a^{b-l}
template <class C>
C reorder_weight(Basis basis, uint32_t b, uint32_t c, uint32_t l) {
  C w = CoeffOps<C>::from_int(factorial(l) * binomial(b, l) * binomial(c, l));
  if (basis == Basis::XP) {
    // (-i)^l
    switch (l % 4) {
      case 0: break;
      case 1: w *= -CoeffOps<C>::imag_unit(); break;
      case 2: w *= C(-1); break;
      case 3: w *= CoeffOps<C>::imag_unit(); break;
    }
  }
  return w;
}

// Accumulates all cross-mode contraction patterns of one key pair.
// The inner pair being reordered is P^{nu1} X^{mu2} (XP) or a^{mu1} adag^{nu2}
// (ladder); either way each contraction lowers both mu and nu of the result.
template <class C>
void mul_terms(NormalPoly<C>& out, Basis basis, const TermKey& k1, const TermKey& k2,
               const C& c12) {
  const size_t n = k1.mu.modes();
  const bool xp = basis == Basis::XP;
  MultiIndex lam(n);
  TermKey key{MultiIndex(n), MultiIndex(n)};

  auto bexp = [&](size_t i) { return xp ? k1.nu[i] : k1.mu[i]; };
  auto cexp = [&](size_t i) { return xp ? k2.mu[i] : k2.nu[i]; };

  for (;;) {
    C w = c12;
    for (size_t i = 0; i < n && !w.is_zero(); ++i)
      if (lam[i]) w *= reorder_weight<C>(basis, bexp(i), cexp(i), lam[i]);
    if (!w.is_zero()) {
      for (size_t i = 0; i < n; ++i) {
        key.mu[i] = k1.mu[i] + k2.mu[i] - lam[i];
        key.nu[i] = k1.nu[i] + k2.nu[i] - lam[i];
      }
      out.add_term(key, w);
    }
    size_t i = 0;
    for (; i < n; ++i) {
      if (lam[i] < std::min(bexp(i), cexp(i))) {
        ++lam[i];
        break;
      }
      lam[i] = 0;
    }
    if (i == n) break;
  }
}

}  // namespace

template <class C>
NormalPoly<C> normal_order_mul(const NormalPoly<C>& p, const NormalPoly<C>& q) {
  p.check_compatible(q);
  if (p.basis() == Basis::Anti)
    throw std::invalid_argument("normal_order_mul: convert anticommutator basis first");
  NormalPoly<C> r(p.basis(), p.modes());
  for (const auto& [k1, c1] : p.terms())
    for (const auto& [k2, c2] : q.terms()) {
      // XP:    (X^m1 P^n1)(X^m2 P^n2) = X^m1 (P^n1 X^m2) P^n2
      // ladder:(adag^n1 a^m1)(adag^n2 a^m2) = adag^n1 (a^m1 adag^n2) a^m2
      mul_terms(r, p.basis(), k1, k2, C(c1) *= c2);
    }
  r.prune();
  return r;
}

template class NormalPoly<CoeffExact>;
template class NormalPoly<CoeffFloat>;
template PolyExact normal_order_mul(const PolyExact&, const PolyExact&);
template PolyFloat normal_order_mul(const PolyFloat&, const PolyFloat&);

}  // namespace qumode
