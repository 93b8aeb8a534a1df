#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace qumode {

using BigInt = boost::multiprecision::mpz_int;
using BigRat = boost::multiprecision::mpq_rational;
/// Arbitrary-precision real; working precision set via MpFloat::default_precision().
using MpFloat = boost::multiprecision::mpfr_float;

/// n!, memoized.
BigInt factorial(unsigned n);

BigInt binomial(unsigned n, unsigned k);

/// n!! with (-1)!! = 0!! = 1; n must be >= -1.
BigInt double_factorial(long n);

/// Falling factorial n (n-1) ... (n-k+1); zero when k > n.
BigInt falling_factorial(unsigned n, unsigned k);

}  // namespace qumode
