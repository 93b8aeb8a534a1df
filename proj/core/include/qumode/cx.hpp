#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include "qumode/bigint.hpp"

namespace qumode {

/// Element of Q[sqrt(2)]: value a + b*sqrt(2) with exact rational a, b.
/// Closed under the ring operations; sqrt(2) enters through the
/// quadrature <-> ladder change of basis and nowhere else.
struct Root2Rat {
  BigRat a{0};
  BigRat b{0};

  Root2Rat() = default;
  Root2Rat(BigRat a_) : a(std::move(a_)) {}
  Root2Rat(BigRat a_, BigRat b_) : a(std::move(a_)), b(std::move(b_)) {}
  Root2Rat(long v) : a(v) {}

  bool is_zero() const { return a == 0 && b == 0; }
  bool is_rational() const { return b == 0; }

  Root2Rat operator-() const { return {-a, -b}; }
  Root2Rat& operator+=(const Root2Rat& o) {
    a += o.a;
    b += o.b;
    return *this;
  }
  Root2Rat& operator-=(const Root2Rat& o) {
    a -= o.a;
    b -= o.b;
    return *this;
  }
  Root2Rat& operator*=(const Root2Rat& o) {
    BigRat na = a * o.a + 2 * (b * o.b);
    BigRat nb = a * o.b + b * o.a;
    a = std::move(na);
    b = std::move(nb);
    return *this;
  }
  friend Root2Rat operator+(Root2Rat x, const Root2Rat& y) { return x += y; }
  friend Root2Rat operator-(Root2Rat x, const Root2Rat& y) { return x -= y; }
  friend Root2Rat operator*(Root2Rat x, const Root2Rat& y) { return x *= y; }
  friend bool operator==(const Root2Rat& x, const Root2Rat& y) {
    return x.a == y.a && x.b == y.b;
  }

  Root2Rat inverse() const {
    BigRat det = a * a - 2 * (b * b);
    if (det == 0) throw std::domain_error("Root2Rat: inverse of zero");
    return {a / det, -b / det};
  }

  double to_double() const {
    return a.convert_to<double>() + b.convert_to<double>() * 1.4142135623730950488;
  }
  MpFloat to_mpfloat() const {
    return MpFloat(a) + MpFloat(b) * sqrt(MpFloat(2));
  }
};

inline Root2Rat inv_sqrt2_exact() { return Root2Rat(BigRat(0), BigRat(1, 2)); }

/// Complex number over a real scalar type T (exact or arbitrary precision).
template <class T>
struct Cx {
  T re{};
  T im{};

  Cx() = default;
  Cx(T r) : re(std::move(r)) {}
  Cx(T r, T i) : re(std::move(r)), im(std::move(i)) {}
  Cx(long v) : re(T(v)) {}

  static Cx i() { return Cx(T(0), T(1)); }

  bool is_zero() const;
  bool is_real() const;

  Cx operator-() const { return {-re, -im}; }
  Cx& operator+=(const Cx& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Cx& operator-=(const Cx& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  Cx& operator*=(const Cx& o) {
    T nr = re * o.re - im * o.im;
    T ni = re * o.im + im * o.re;
    re = std::move(nr);
    im = std::move(ni);
    return *this;
  }
  friend Cx operator+(Cx x, const Cx& y) { return x += y; }
  friend Cx operator-(Cx x, const Cx& y) { return x -= y; }
  friend Cx operator*(Cx x, const Cx& y) { return x *= y; }
  friend bool operator==(const Cx& x, const Cx& y) { return x.re == y.re && x.im == y.im; }

  Cx conj() const { return {re, -im}; }
  T norm2() const { return re * re + im * im; }
};

using CoeffExact = Cx<Root2Rat>;
using CoeffFloat = Cx<MpFloat>;

template <>
inline bool Cx<Root2Rat>::is_zero() const {
  return re.is_zero() && im.is_zero();
}
template <>
inline bool Cx<Root2Rat>::is_real() const {
  return im.is_zero();
}
template <>
inline bool Cx<MpFloat>::is_zero() const {
  return re == 0 && im == 0;
}
template <>
inline bool Cx<MpFloat>::is_real() const {
  return im == 0;
}

inline std::complex<double> to_cd(const CoeffExact& c) {
  return {c.re.to_double(), c.im.to_double()};
}
inline std::complex<double> to_cd(const CoeffFloat& c) {
  return {c.re.convert_to<double>(), c.im.convert_to<double>()};
}

// Scalar factories shared by the templated polynomial code.
template <class C>
struct CoeffOps;

template <>
struct CoeffOps<CoeffExact> {
  static CoeffExact from_rat(const BigRat& q) { return CoeffExact(Root2Rat(q)); }
  static CoeffExact from_int(const BigInt& n) { return from_rat(BigRat(n)); }
  static CoeffExact imag_unit() { return CoeffExact::i(); }
  static CoeffExact inv_sqrt2() { return CoeffExact(inv_sqrt2_exact()); }
  static CoeffExact from_double(double) = delete;  // no silent exact<-float mixing
  static constexpr bool exact = true;
};

template <>
struct CoeffOps<CoeffFloat> {
  static CoeffFloat from_rat(const BigRat& q) { return CoeffFloat(MpFloat(q)); }
  static CoeffFloat from_int(const BigInt& n) { return CoeffFloat(MpFloat(n)); }
  static CoeffFloat imag_unit() { return CoeffFloat::i(); }
  static CoeffFloat inv_sqrt2() { return CoeffFloat(1 / sqrt(MpFloat(2))); }
  static CoeffFloat from_double(double x) { return CoeffFloat(MpFloat(x)); }
  static constexpr bool exact = false;
};

/// Explicit (lossy only in the float direction) conversions between the two
/// coefficient kinds. There is intentionally no implicit path.
inline CoeffFloat to_float_coeff(const CoeffExact& c) {
  return {c.re.to_mpfloat(), c.im.to_mpfloat()};
}

}  // namespace qumode
