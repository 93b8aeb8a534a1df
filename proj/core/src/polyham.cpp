#include "qumode/polyham.hpp"

#include "qumode/bigint.hpp"

namespace qumode {

namespace {

template <class C>
C ipow(unsigned k) {  // i^k
  switch (k % 4) {
    case 0: return C(1);
    case 1: return CoeffOps<C>::imag_unit();
    case 2: return C(-1);
    default: return -CoeffOps<C>::imag_unit();
  }
}

template <class C>
C neg_ipow(unsigned k) {  // (-i)^k
  C v = ipow<C>(k);
  return (k % 2) ? -v : v;
}

template <class C>
C cpow(const C& z, unsigned k) {
  C r(1);
  for (unsigned i = 0; i < k; ++i) r *= z;
  return r;
}

}  // namespace

PolyExact commute_xp(unsigned mu, unsigned nu) {
  PolyExact r(Basis::XP, 1);
  const unsigned lmax = std::min(mu, nu);
  for (unsigned l = 1; l <= lmax; ++l) {
    BigRat mag(factorial(mu) * factorial(nu),
               factorial(mu - l) * factorial(nu - l) * factorial(l));
    CoeffExact c = -(neg_ipow<CoeffExact>(l) * CoeffOps<CoeffExact>::from_rat(mag));
    r.add_term({{mu - l}, {nu - l}}, c);
  }
  return r;
}

template <class C>
NormalPoly<C> binomial_power_xp(const C& alpha, const C& beta, unsigned n) {
  // (alpha X + beta P)^n = sum_{k<=n/2} sum_j n!/(k! j! (n-2k-j)!) (-i/2)^k
  //                        alpha^{k+j} beta^{n-k-j} X^j P^{n-2k-j}
  NormalPoly<C> r(Basis::XP, 1);
  const C half_negi = neg_ipow<C>(1) * CoeffOps<C>::from_rat(BigRat(1, 2));
  for (unsigned k = 0; 2 * k <= n; ++k)
    for (unsigned j = 0; j + 2 * k <= n; ++j) {
      const unsigned pj = n - 2 * k - j;
      BigRat mag(factorial(n), factorial(k) * factorial(j) * factorial(pj));
      C c = CoeffOps<C>::from_rat(mag);
      c *= cpow(half_negi, k);
      c *= cpow(alpha, k + j);
      c *= cpow(beta, n - k - j);
      r.add_term({{j}, {pj}}, c);
    }
  r.prune();
  return r;
}

template <class C>
NormalPoly<C> binomial_power_xp2(const C& alpha, const C& beta, unsigned n) {
  // From the Zassenhaus factorization
  //   exp(t(aX + bP^2)) = exp(taX) exp(tbP^2) exp(-i t^2 ab P) exp(-t^3 a^2 b / 3):
  //   (alpha X + beta P^2)^n / n! =
  //     sum_{j+k+2l+3m=n} alpha^{j+l+2m} beta^{k+l+m} (-i)^l (-1)^m
  //                       / (3^m j! k! l! m!)  X^j P^{2k+l}.
  NormalPoly<C> r(Basis::XP, 1);
  for (unsigned m = 0; 3 * m <= n; ++m)
    for (unsigned l = 0; 3 * m + 2 * l <= n; ++l)
      for (unsigned k = 0; 3 * m + 2 * l + k <= n; ++k) {
        const unsigned j = n - 3 * m - 2 * l - k;
        BigInt den = factorial(j) * factorial(k) * factorial(l) * factorial(m);
        for (unsigned t = 0; t < m; ++t) den *= 3;
        C c = CoeffOps<C>::from_rat(BigRat(factorial(n), den));
        c *= neg_ipow<C>(l);
        if (m % 2) c = -c;
        c *= cpow(alpha, j + l + 2 * m);
        c *= cpow(beta, k + l + m);
        r.add_term({{j}, {2 * k + l}}, c);
      }
  r.prune();
  return r;
}

namespace {

// Ladder polynomial for X_i^p or P_i^p, built by repeated multiplication.
template <class C>
NormalPoly<C> quadrature_power_ladder(size_t modes, size_t i, unsigned p, bool is_x) {
  NormalPoly<C> base(Basis::Ladder, modes);
  const C isq2 = CoeffOps<C>::inv_sqrt2();
  if (is_x) {
    base.add_term({MultiIndex::unit(modes, i), MultiIndex(modes)}, isq2);
    base.add_term({MultiIndex(modes), MultiIndex::unit(modes, i)}, isq2);
  } else {
    // P = -i (a - adag)/sqrt(2)
    const C c = -CoeffOps<C>::imag_unit() * isq2;
    base.add_term({MultiIndex::unit(modes, i), MultiIndex(modes)}, c);
    base.add_term({MultiIndex(modes), MultiIndex::unit(modes, i)}, -c);
  }
  return pow(base, p);
}

template <class C>
NormalPoly<C> ladder_power_xp(size_t modes, size_t i, unsigned p, bool creation) {
  NormalPoly<C> base(Basis::XP, modes);
  const C isq2 = CoeffOps<C>::inv_sqrt2();
  const C im = CoeffOps<C>::imag_unit();
  // a = (X + iP)/sqrt(2), adag = (X - iP)/sqrt(2)
  base.add_term({MultiIndex::unit(modes, i), MultiIndex(modes)}, isq2);
  base.add_term({MultiIndex(modes), MultiIndex::unit(modes, i)}, creation ? -(im * isq2) : im * isq2);
  return pow(base, p);
}

}  // namespace

template <class C>
NormalPoly<C> xp_to_ladder(const NormalPoly<C>& p) {
  if (p.basis() != Basis::XP) throw std::invalid_argument("xp_to_ladder: XP input required");
  const size_t n = p.modes();
  NormalPoly<C> r(Basis::Ladder, n);
  for (const auto& [k, c] : p.terms()) {
    NormalPoly<C> term = NormalPoly<C>::identity(Basis::Ladder, n);
    for (size_t i = 0; i < n; ++i) {
      if (k.mu[i]) term = term * quadrature_power_ladder<C>(n, i, k.mu[i], true);
      if (k.nu[i]) term = term * quadrature_power_ladder<C>(n, i, k.nu[i], false);
    }
    r += term * c;
  }
  r.prune();
  return r;
}

template <class C>
NormalPoly<C> ladder_to_xp(const NormalPoly<C>& p) {
  if (p.basis() != Basis::Ladder)
    throw std::invalid_argument("ladder_to_xp: ladder input required");
  const size_t n = p.modes();
  NormalPoly<C> r(Basis::XP, n);
  for (const auto& [k, c] : p.terms()) {
    NormalPoly<C> term = NormalPoly<C>::identity(Basis::XP, n);
    // Key (mu, nu) is adag^nu a^mu: creation factors first.
    for (size_t i = 0; i < n; ++i) {
      if (k.nu[i]) term = term * ladder_power_xp<C>(n, i, k.nu[i], true);
      if (k.mu[i]) term = term * ladder_power_xp<C>(n, i, k.mu[i], false);
    }
    r += term * c;
  }
  r.prune();
  return r;
}

namespace {

// (1/2){X^mu, P^nu} as an XP-normal polynomial.
template <class C>
NormalPoly<C> half_anticomm_xp(size_t modes, const TermKey& k) {
  NormalPoly<C> xmu(Basis::XP, modes), pnu(Basis::XP, modes);
  xmu.add_term({k.mu, MultiIndex(modes)}, C(1));
  pnu.add_term({MultiIndex(modes), k.nu}, C(1));
  NormalPoly<C> r = anticommutator(xmu, pnu);
  r *= CoeffOps<C>::from_rat(BigRat(1, 2));
  return r;
}

}  // namespace

template <class C>
NormalPoly<C> to_anticommutator(const NormalPoly<C>& p) {
  if (p.basis() != Basis::XP)
    throw std::invalid_argument("to_anticommutator: XP input required");
  if (!p.is_hermitian())
    throw std::invalid_argument("to_anticommutator: Hermitian input required");
  const size_t n = p.modes();
  NormalPoly<C> rem = p;
  NormalPoly<C> out(Basis::Anti, n);
  // Peel monomials from the top degree down; (1/2){X^mu,P^nu} has leading
  // term X^mu P^nu plus lower-degree corrections only.
  while (!rem.empty()) {
    const uint32_t d = rem.degree();
    std::vector<std::pair<TermKey, C>> level;
    for (const auto& [k, c] : rem.terms())
      if (k.degree() == d) level.emplace_back(k, c);
    for (const auto& [k, c] : level) {
      out.add_term(k, c);
      rem -= half_anticomm_xp<C>(n, k) * c;
    }
  }
  return out;
}

template <class C>
NormalPoly<C> from_anticommutator(const NormalPoly<C>& p) {
  if (p.basis() != Basis::Anti)
    throw std::invalid_argument("from_anticommutator: anticommutator input required");
  NormalPoly<C> r(Basis::XP, p.modes());
  for (const auto& [k, c] : p.terms()) r += half_anticomm_xp<C>(p.modes(), k) * c;
  r.prune();
  return r;
}

PolyFloat to_float_poly(const PolyExact& p) {
  PolyFloat out(p.basis(), p.modes());
  for (const auto& [k, c] : p.terms()) out.add_term(k, to_float_coeff(c));
  return out;
}

CoeffExact vacuum_moment(unsigned k, unsigned l) {
  const unsigned n = k + l;
  if (n % 2) return CoeffExact();
  // <0|X^k P^l|0> = (1+i)^{n/2} / 2^n  sum_{m=0}^{n/2} (-i)^m K^{(n)}_{2m}(l)
  //                 (n-2m-1)!! (2m-1)!!
  CoeffExact sum;
  for (unsigned m = 0; 2 * m <= n; ++m) {
    BigInt mag = kravchuk(n, 2 * m, l) * double_factorial(long(n) - 2 * long(m) - 1) *
                 double_factorial(2 * long(m) - 1);
    sum += neg_ipow<CoeffExact>(m) * CoeffOps<CoeffExact>::from_int(mag);
  }
  CoeffExact pref(1);
  const CoeffExact one_plus_i(Root2Rat(BigRat(1)), Root2Rat(BigRat(1)));
  for (unsigned t = 0; t < n / 2; ++t) pref *= one_plus_i;
  BigInt den = 1;
  den <<= n;
  pref *= CoeffOps<CoeffExact>::from_rat(BigRat(1, den));
  return pref * sum;
}

BigRat fock_ladder_expectation(unsigned m, unsigned n, unsigned k) {
  if (m != n) return BigRat(0);
  return BigRat(factorial(m + k), factorial(k));
}

template <class C>
C hermite_he(unsigned n, const C& x) {
  C prev(1);
  if (n == 0) return prev;
  C cur = x;
  for (unsigned j = 1; j < n; ++j) {
    C next = x * cur - CoeffOps<C>::from_int(BigInt(j)) * prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

BigInt kravchuk(unsigned n, unsigned m, unsigned l) {
  if (m > n) throw std::invalid_argument("kravchuk: m must be <= n");
  BigInt s = 0;
  for (unsigned j = 0; j <= m; ++j) {
    BigInt t = binomial(l, j) * binomial(n - l, m - j);
    s += (j % 2) ? -t : t;
  }
  return s;
}

CoeffExact fock_diagonal_expectation(const PolyExact& ladder_poly,
                                     const MultiIndex& occupation) {
  if (ladder_poly.basis() != Basis::Ladder)
    throw std::invalid_argument("fock_diagonal_expectation: ladder input required");
  if (occupation.modes() != ladder_poly.modes())
    throw std::invalid_argument("fock_diagonal_expectation: mode count mismatch");
  CoeffExact r;
  for (const auto& [k, c] : ladder_poly.terms()) {
    if (k.mu != k.nu) continue;
    BigInt w = 1;
    bool zero = false;
    for (size_t i = 0; i < occupation.modes() && !zero; ++i) {
      if (k.mu[i] > occupation[i])
        zero = true;
      else
        w *= falling_factorial(occupation[i], k.mu[i]);
    }
    if (!zero) r += c * CoeffOps<CoeffExact>::from_int(w);
  }
  return r;
}

template PolyExact binomial_power_xp(const CoeffExact&, const CoeffExact&, unsigned);
template PolyFloat binomial_power_xp(const CoeffFloat&, const CoeffFloat&, unsigned);
template PolyExact binomial_power_xp2(const CoeffExact&, const CoeffExact&, unsigned);
template PolyFloat binomial_power_xp2(const CoeffFloat&, const CoeffFloat&, unsigned);
template PolyExact xp_to_ladder(const PolyExact&);
template PolyFloat xp_to_ladder(const PolyFloat&);
template PolyExact ladder_to_xp(const PolyExact&);
template PolyFloat ladder_to_xp(const PolyFloat&);
template PolyExact to_anticommutator(const PolyExact&);
template PolyExact from_anticommutator(const PolyExact&);
template CoeffExact hermite_he(unsigned, const CoeffExact&);
template CoeffFloat hermite_he(unsigned, const CoeffFloat&);

}  // namespace qumode
