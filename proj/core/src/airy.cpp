#include "qumode/airy.hpp"

#include <cmath>
#include <stdexcept>

namespace qumode {

namespace {
unsigned bits_to_digits(unsigned bits) {
  return unsigned(std::ceil(bits * 0.30103)) + 4;
}
}  // namespace

PrecisionGuard::PrecisionGuard(unsigned bits) : saved_digits_(MpFloat::default_precision()) {
  MpFloat::default_precision(bits_to_digits(bits));
}

PrecisionGuard::~PrecisionGuard() { MpFloat::default_precision(saved_digits_); }

MpFloat airy_at_zero(unsigned precision_bits) {
  PrecisionGuard guard(precision_bits);
  // 3^{-2/3} / Gamma(2/3)
  return pow(MpFloat(3), MpFloat(-2) / 3) / boost::multiprecision::tgamma(MpFloat(2) / 3);
}

MpFloat airy_prime_at_zero(unsigned precision_bits) {
  PrecisionGuard guard(precision_bits);
  return -pow(MpFloat(3), MpFloat(-1) / 3) / boost::multiprecision::tgamma(MpFloat(1) / 3);
}

unsigned airy_valid_degree(unsigned l, double x) {
  const double ax = std::abs(x);
  return unsigned(std::ceil(100.0 * (ax * ax * ax + 1.0))) + l;
}

namespace {

// Core series evaluation to a given polynomial degree (or adaptively when
// degree == 0), with a certified tail bound.
AiryValue airy_series(unsigned l, const MpFloat& x, unsigned degree,
                      unsigned precision_bits);

}  // namespace

AiryValue airy_derivative(unsigned l, const MpFloat& x, unsigned degree,
                          unsigned precision_bits) {
  const double xd = x.convert_to<double>();
  if (degree < airy_valid_degree(l, xd))
    throw std::invalid_argument("airy_derivative: degree below the validity threshold");
  return airy_series(l, x, degree, precision_bits);
}

AiryValue airy_derivative_auto(unsigned l, const MpFloat& x, unsigned precision_bits) {
  return airy_series(l, x, 0, precision_bits);
}

namespace {

AiryValue airy_series(unsigned l, const MpFloat& x, unsigned degree,
                      unsigned precision_bits) {
  PrecisionGuard guard(precision_bits);

  const MpFloat ai0 = airy_at_zero(precision_bits);
  const MpFloat aip0 = airy_prime_at_zero(precision_bits);

  // f(x) = sum_n a_n x^{3n},   a_n (3n)!   = prod_{u<n} (3u+1)
  // g(x) = sum_n b_n x^{3n+1}, b_n (3n+1)! = prod_{u<n} (3u+2)
  // so the l'th-derivative terms are
  //   f: prod_{u<n}(3u+1) / (3n-l)!   x^{3n-l}
  //   g: prod_{u<n}(3u+2) / (3n+1-l)! x^{3n+1-l}
  const double xd = x.convert_to<double>();
  MpFloat sum_f = 0, sum_g = 0;
  MpFloat term_f = 0, term_g = 0;  // first omitted term magnitudes
  const MpFloat x3 = x * x * x;
  const MpFloat tiny = pow(MpFloat(2), -int(precision_bits) - 8);

  // Shared summation for the two series; offset = 1 picks the g-series
  // exponents and ratio, 0 the f-series.
  auto run = [&](unsigned offset, MpFloat& sum, MpFloat& omitted) {
    unsigned n0 = 0;
    while (3 * n0 + offset < l) ++n0;
    MpFloat t = 1;
    for (unsigned u = 0; u < n0; ++u) t *= 3 * u + 1 + offset;
    for (unsigned u = 2; u <= 3 * n0 + offset - l; ++u) t /= u;
    t *= pow(x, int(3 * n0 + offset - l));
    unsigned quiet = 0;
    for (unsigned n = n0;; ++n) {
      const unsigned expo = 3 * n + offset - l;
      if (degree > 0 && expo > degree) break;
      if (degree == 0) {
        // adaptive: stop once terms are decaying (ratio < 1/2) and negligible
        const bool decaying = double(3 * n + 1 + offset) * xd * xd * xd <
                              0.5 * double(expo + 1) * double(expo + 2) * double(expo + 3);
        if (decaying && abs(t) < tiny * (abs(sum) + 1)) {
          if (++quiet >= 2) break;
        } else {
          quiet = 0;
        }
      }
      sum += t;
      omitted = abs(t);
      // T_{n+1}/T_n = (3n+1+offset) x^3 / ((3n+3+offset-l)(3n+2+offset-l)(3n+1+offset-l))
      t *= (3 * MpFloat(n) + 1 + offset) * x3;
      t /= MpFloat(expo + 3) * MpFloat(expo + 2) * MpFloat(expo + 1);
    }
  };
  run(0, sum_f, term_f);
  run(1, sum_g, term_g);

  AiryValue out;
  out.value = ai0 * sum_f + aip0 * sum_g;

  // Geometric tail (ratio < 1/2 past the stopping point for both branches).
  MpFloat tail = 2 * (abs(ai0) * term_f + abs(aip0) * term_g);
  if (degree > 0) {
    // Lemma bound (c/degree)^degree with c = |x|^3 + |x|^2, in logs.
    const double ax = std::abs(xd);
    const double c = ax * ax * ax + ax * ax;
    if (c > 0) {
      MpFloat lemma = exp(MpFloat(degree) * (log(MpFloat(c)) - log(MpFloat(degree))));
      if (lemma < tail) tail = lemma;
    } else {
      tail = 0;
    }
  }
  out.error_bound = tail;
  return out;
}

}  // namespace

}  // namespace qumode
