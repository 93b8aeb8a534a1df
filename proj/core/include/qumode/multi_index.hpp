#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <vector>

namespace qumode {

/// Exponent vector over modes, e.g. X^mu = X_1^{mu_1} ... X_n^{mu_n}.
struct MultiIndex {
  std::vector<uint32_t> e;

  MultiIndex() = default;
  explicit MultiIndex(size_t modes) : e(modes, 0) {}
  MultiIndex(std::initializer_list<uint32_t> v) : e(v) {}

  size_t modes() const { return e.size(); }
  uint32_t operator[](size_t i) const { return e[i]; }
  uint32_t& operator[](size_t i) { return e[i]; }

  /// |mu|, the total degree.
  uint32_t total() const { return std::accumulate(e.begin(), e.end(), 0u); }

  bool is_zero() const {
    for (auto v : e)
      if (v) return false;
    return true;
  }

  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

  static MultiIndex unit(size_t modes, size_t i, uint32_t pow = 1) {
    MultiIndex m(modes);
    m[i] = pow;
    return m;
  }
};

inline MultiIndex operator+(const MultiIndex& x, const MultiIndex& y) {
  MultiIndex r(x.modes());
  for (size_t i = 0; i < x.e.size(); ++i) r[i] = x[i] + y[i];
  return r;
}

/// Key of one normal-form monomial; interpretation depends on the basis.
struct TermKey {
  MultiIndex mu;  // XP: X powers.   Ladder: annihilation powers.
  MultiIndex nu;  // XP: P powers.   Ladder: creation powers.

  uint32_t degree() const { return mu.total() + nu.total(); }
  friend auto operator<=>(const TermKey&, const TermKey&) = default;
};

}  // namespace qumode
