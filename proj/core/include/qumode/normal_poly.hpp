#pragma once

#include <map>
#include <string>

#include "qumode/cx.hpp"
#include "qumode/errors.hpp"
#include "qumode/multi_index.hpp"

namespace qumode {

enum class Basis {
  XP,      // X^mu P^nu, X left
  Ladder,  // adag^nu a^mu, creation left
  Anti,    // (1/2){X^mu, P^nu}, real coefficients
};

std::string basis_name(Basis b);
Basis basis_from_name(const std::string& s);

/// Cap on stored monomials during algebra; ops throw BudgetExceeded beyond it.
void set_term_budget(size_t max_terms);
size_t term_budget();

/// Polynomial operator in normal form over n modes: a coefficient map
/// (mu, nu) -> c. No zero coefficients are stored. Value type; every
/// operation returns a fresh polynomial.
template <class C>
class NormalPoly {
 public:
  using Coeff = C;
  using TermMap = std::map<TermKey, C>;

  NormalPoly() = default;
  NormalPoly(Basis basis, size_t modes) : basis_(basis), modes_(modes) {}

  Basis basis() const { return basis_; }
  size_t modes() const { return modes_; }
  const TermMap& terms() const { return terms_; }
  size_t term_count() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  uint32_t degree() const {
    uint32_t d = 0;
    for (const auto& [k, c] : terms_) d = std::max(d, k.degree());
    return d;
  }

  void add_term(const TermKey& k, const C& c) {
    if (c.is_zero()) return;
    auto it = terms_.find(k);
    if (it == terms_.end()) {
      if (terms_.size() >= term_budget())
        throw BudgetExceeded("term budget exceeded at degree " + std::to_string(degree()));
      terms_.emplace(k, c);
    } else {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  C coeff(const TermKey& k) const {
    auto it = terms_.find(k);
    return it == terms_.end() ? C() : it->second;
  }

  NormalPoly& operator+=(const NormalPoly& o) {
    check_compatible(o);
    for (const auto& [k, c] : o.terms_) add_term(k, c);
    return *this;
  }
  NormalPoly& operator-=(const NormalPoly& o) {
    check_compatible(o);
    for (const auto& [k, c] : o.terms_) add_term(k, -c);
    return *this;
  }
  friend NormalPoly operator+(NormalPoly x, const NormalPoly& y) { return x += y; }
  friend NormalPoly operator-(NormalPoly x, const NormalPoly& y) { return x -= y; }

  NormalPoly& operator*=(const C& s) {
    if (s.is_zero()) {
      terms_.clear();
      return *this;
    }
    for (auto& [k, c] : terms_) c *= s;
    return *this;
  }
  friend NormalPoly operator*(NormalPoly x, const C& s) { return x *= s; }
  friend NormalPoly operator*(const C& s, NormalPoly x) { return x *= s; }

  friend bool operator==(const NormalPoly& x, const NormalPoly& y) {
    return x.basis_ == y.basis_ && x.modes_ == y.modes_ && x.terms_ == y.terms_;
  }

  /// Formal adjoint, re-expressed in the same normal form.
  NormalPoly adjoint() const;

  bool is_hermitian() const { return adjoint() == *this; }

  /// Drop float-mode coefficients of negligible relative magnitude
  /// (|c| < 1e-30 * max |c|). Exact mode stores no zeros by construction.
  void prune();

  static NormalPoly identity(Basis basis, size_t modes) {
    NormalPoly p(basis, modes);
    p.add_term({MultiIndex(modes), MultiIndex(modes)}, C(1));
    return p;
  }
  /// X_i (XP basis).
  static NormalPoly x(size_t modes, size_t i) {
    NormalPoly p(Basis::XP, modes);
    p.add_term({MultiIndex::unit(modes, i), MultiIndex(modes)}, C(1));
    return p;
  }
  /// P_i (XP basis).
  static NormalPoly p(size_t modes, size_t i) {
    NormalPoly p_(Basis::XP, modes);
    p_.add_term({MultiIndex(modes), MultiIndex::unit(modes, i)}, C(1));
    return p_;
  }
  /// a_i (ladder basis).
  static NormalPoly a(size_t modes, size_t i) {
    NormalPoly p(Basis::Ladder, modes);
    p.add_term({MultiIndex::unit(modes, i), MultiIndex(modes)}, C(1));
    return p;
  }
  /// adag_i (ladder basis).
  static NormalPoly adag(size_t modes, size_t i) {
    NormalPoly p(Basis::Ladder, modes);
    p.add_term({MultiIndex(modes), MultiIndex::unit(modes, i)}, C(1));
    return p;
  }

  void check_compatible(const NormalPoly& o) const {
    if (modes_ != o.modes_) throw std::invalid_argument("NormalPoly: mode count mismatch");
    if (basis_ != o.basis_) throw std::invalid_argument("NormalPoly: basis mismatch");
  }

 private:
  Basis basis_ = Basis::XP;
  size_t modes_ = 0;
  TermMap terms_;
};

/// Product re-expressed in normal form; exact when the inputs are exact.
/// Defined for the XP and ladder bases.
template <class C>
NormalPoly<C> normal_order_mul(const NormalPoly<C>& p, const NormalPoly<C>& q);

template <class C>
NormalPoly<C> operator*(const NormalPoly<C>& p, const NormalPoly<C>& q) {
  return normal_order_mul(p, q);
}

template <class C>
NormalPoly<C> commutator(const NormalPoly<C>& p, const NormalPoly<C>& q) {
  return normal_order_mul(p, q) - normal_order_mul(q, p);
}

template <class C>
NormalPoly<C> anticommutator(const NormalPoly<C>& p, const NormalPoly<C>& q) {
  return normal_order_mul(p, q) + normal_order_mul(q, p);
}

template <class C>
NormalPoly<C> pow(const NormalPoly<C>& p, unsigned n) {
  NormalPoly<C> r = NormalPoly<C>::identity(p.basis(), p.modes());
  for (unsigned i = 0; i < n; ++i) r = normal_order_mul(r, p);
  return r;
}

using PolyExact = NormalPoly<CoeffExact>;
using PolyFloat = NormalPoly<CoeffFloat>;

template <>
void NormalPoly<CoeffExact>::prune();
template <>
void NormalPoly<CoeffFloat>::prune();

extern template class NormalPoly<CoeffExact>;
extern template class NormalPoly<CoeffFloat>;
extern template PolyExact normal_order_mul(const PolyExact&, const PolyExact&);
extern template PolyFloat normal_order_mul(const PolyFloat&, const PolyFloat&);

}  // namespace qumode
