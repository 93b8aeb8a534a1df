#include "qumode/bigint.hpp"

#include <mutex>
#include <vector>

namespace qumode {

BigInt factorial(unsigned n) {
  // Returned by value: the memo vector may reallocate on growth, so handing
  // out references would dangle inside compound expressions.
  static std::vector<BigInt> cache{BigInt(1)};
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  while (cache.size() <= n) cache.push_back(cache.back() * BigInt(cache.size()));
  return cache[n];
}

BigInt binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  return factorial(n) / (factorial(k) * factorial(n - k));
}

BigInt double_factorial(long n) {
  if (n <= 0) return 1;  // (-1)!! = 0!! = 1
  BigInt r = 1;
  for (long v = n; v > 1; v -= 2) r *= v;
  return r;
}

BigInt falling_factorial(unsigned n, unsigned k) {
  if (k > n) return 0;
  return factorial(n) / factorial(n - k);
}

}  // namespace qumode
