#pragma once

#include "qumode/normal_poly.hpp"

namespace qumode {

/// [X^mu, P^nu] for a single mode, in XP normal form (exact).
/// Closed form: -sum_{l=1}^{min(mu,nu)} (-i)^l mu! nu! / ((mu-l)!(nu-l)!l!) X^{mu-l} P^{nu-l}.
PolyExact commute_xp(unsigned mu, unsigned nu);

/// Normal form of (alpha X + beta P)^n (single mode).
template <class C>
NormalPoly<C> binomial_power_xp(const C& alpha, const C& beta, unsigned n);

/// Normal form of (alpha X + beta P^2)^n (single mode).
template <class C>
NormalPoly<C> binomial_power_xp2(const C& alpha, const C& beta, unsigned n);

/// Change of basis X = (a + adag)/sqrt(2), P = (a - adag)/(i sqrt(2)).
/// Ladder normal form puts creation operators on the left (adag^nu a^mu) so
/// that Fock and coherent expectations read off directly.
template <class C>
NormalPoly<C> xp_to_ladder(const NormalPoly<C>& p);
template <class C>
NormalPoly<C> ladder_to_xp(const NormalPoly<C>& p);

/// Expansion of a Hermitian XP polynomial over (1/2){X^mu, P^nu} with real
/// coefficients. Throws std::invalid_argument for non-Hermitian input.
template <class C>
NormalPoly<C> to_anticommutator(const NormalPoly<C>& p);
/// Inverse expansion back to XP normal form.
template <class C>
NormalPoly<C> from_anticommutator(const NormalPoly<C>& p);

/// <0| X^k P^l |0>, exact; zero when k+l is odd. Evaluated through the
/// Kravchuk-polynomial closed form.
CoeffExact vacuum_moment(unsigned k, unsigned l);

/// <k| a^m adag^n |k> = delta_{m,n} (m+k)!/k!, exact.
BigRat fock_ladder_expectation(unsigned m, unsigned n, unsigned k);

/// Probabilists' Hermite polynomial He_n(x).
template <class C>
C hermite_he(unsigned n, const C& x);

/// Kravchuk value K^{(n)}_m(l) = sum_j (-1)^j C(l,j) C(n-l, m-j), exact.
BigInt kravchuk(unsigned n, unsigned m, unsigned l);

/// Lossy exact -> arbitrary-precision-float conversion (never implicit).
PolyFloat to_float_poly(const PolyExact& p);

/// <m_1...m_n| p |m_1...m_n> for a ladder-normal polynomial; exact.
/// Only keys with mu == nu contribute: <m|adag^q a^q|m> = m!/(m-q)!.
CoeffExact fock_diagonal_expectation(const PolyExact& ladder_poly,
                                     const MultiIndex& occupation);

extern template PolyExact binomial_power_xp(const CoeffExact&, const CoeffExact&, unsigned);
extern template PolyFloat binomial_power_xp(const CoeffFloat&, const CoeffFloat&, unsigned);
extern template PolyExact binomial_power_xp2(const CoeffExact&, const CoeffExact&, unsigned);
extern template PolyFloat binomial_power_xp2(const CoeffFloat&, const CoeffFloat&, unsigned);
extern template PolyExact xp_to_ladder(const PolyExact&);
extern template PolyFloat xp_to_ladder(const PolyFloat&);
extern template PolyExact ladder_to_xp(const PolyExact&);
extern template PolyFloat ladder_to_xp(const PolyFloat&);
extern template PolyExact to_anticommutator(const PolyExact&);
extern template PolyExact from_anticommutator(const PolyExact&);
extern template CoeffExact hermite_he(unsigned, const CoeffExact&);
extern template CoeffFloat hermite_he(unsigned, const CoeffFloat&);

}  // namespace qumode
