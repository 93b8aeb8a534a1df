#pragma once

#include "qumode/bigint.hpp"

namespace qumode {

struct AiryValue {
  MpFloat value;
  MpFloat error_bound;  // certified truncation bound
};

/// l'th derivative of the Airy function at real x, evaluated from the two
/// power series f, g with Ai(x) = Ai(0) f(x) + Ai'(0) g(x), truncated at
/// polynomial degree `degree`. Requires degree >= 100 (|x|^3 + 1) + l (the
/// validity threshold of the certified bound); the attached bound is the
/// tighter of (c/degree)^degree with c = |x|^3 + |x|^2 and a geometric tail
/// estimate from the first omitted terms.
AiryValue airy_derivative(unsigned l, const MpFloat& x, unsigned degree,
                          unsigned precision_bits);

/// Degree that satisfies the validity threshold for (l, x).
unsigned airy_valid_degree(unsigned l, double x);

/// Same series, summed adaptively until the terms fall below the working
/// precision; the attached bound is the geometric-tail estimate certified by
/// a term-ratio check. Used where the fixed-degree contract above would be
/// needlessly expensive.
AiryValue airy_derivative_auto(unsigned l, const MpFloat& x, unsigned precision_bits);

/// Ai(0) and Ai'(0) at the given working precision.
MpFloat airy_at_zero(unsigned precision_bits);
MpFloat airy_prime_at_zero(unsigned precision_bits);

/// RAII guard for the global MPFR working precision (bits).
class PrecisionGuard {
 public:
  explicit PrecisionGuard(unsigned bits);
  ~PrecisionGuard();
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  unsigned saved_digits_;
};

}  // namespace qumode
