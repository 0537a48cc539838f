#pragma once

#include <cstdint>
#include <string>

#include "symtensor/errors.hpp"

namespace symtensor {

// Exact unsigned arithmetic that throws OverflowError instead of wrapping.

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) {
    throw OverflowError("integer overflow in " + std::to_string(a) + " + " +
                        std::to_string(b));
  }
  return r;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw OverflowError("integer overflow in " + std::to_string(a) + " * " +
                        std::to_string(b));
  }
  return r;
}

inline std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < exp; ++i) r = checked_mul(r, base);
  return r;
}

/// Binomial coefficient C(n, k); zero when k > n.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  // r * (n - k + i) is divisible by i at every step; the 128-bit
  // intermediate keeps the product exact before the division.
  __extension__ using u128 = unsigned __int128;
  u128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i);
    r /= i;
    if (r > UINT64_MAX) {
      throw OverflowError("binomial(" + std::to_string(n) + ", " +
                          std::to_string(k) + ") exceeds 64 bits");
    }
  }
  return static_cast<std::uint64_t>(r);
}

inline std::uint64_t factorial(std::uint64_t n) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 2; i <= n; ++i) r = checked_mul(r, i);
  return r;
}

}  // namespace symtensor
