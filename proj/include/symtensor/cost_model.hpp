#pragma once

// Closed-form storage, flop and memop counts for computing
// C := [A; X, ..., X] with BCSS operands and with dense operands.
// Every count is evaluated in exact 64-bit integer arithmetic (overflow
// throws); only ratios and asymptotic approximations are floating point.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "symtensor/checked.hpp"
#include "symtensor/errors.hpp"
#include "symtensor/sym_index.hpp"

namespace symtensor {

enum class Variant { Bcss, Dense };

inline const char* to_string(Variant v) {
  return v == Variant::Bcss ? "BCSS" : "Dense";
}

struct CostParams {
  std::uint64_t m = 0;
  std::uint64_t n = 0;
  std::uint64_t p = 0;
  std::uint64_t b_a = 0;
  std::uint64_t b_c = 0;
  std::uint64_t meta_k = 0;
};

struct CostReport {
  Variant variant = Variant::Dense;
  CostParams params;
  std::uint64_t storage_a = 0;
  std::uint64_t storage_c = 0;
  std::uint64_t storage_x = 0;
  /// Temporaries: stored entries and meta-data, kept apart.
  std::uint64_t storage_temps = 0;
  std::uint64_t storage_temps_meta = 0;
  std::uint64_t flops = 0;
  std::uint64_t memops = 0;

  std::uint64_t storage_temps_total() const {
    return checked_add(storage_temps, storage_temps_meta);
  }
};

namespace detail {

inline void require_order(std::uint64_t m) {
  if (m < 2) throw ParameterError("order must be at least 2");
}

inline void require_divides(std::uint64_t b, std::uint64_t n, const char* what) {
  if (b == 0 || n == 0 || n % b != 0) {
    throw ParameterError(std::string(what) + ": block dimension " +
                         std::to_string(b) + " does not divide " +
                         std::to_string(n));
  }
}

}  // namespace detail

/// BCSS algorithm exploiting partial symmetry of the temporaries.
///
/// With n̄ = n/b_a, p̄ = p/b_c and, for d = 0..m-1,
///   w_d = C(p̄+d, d+1) * C(n̄+m-d-2, m-d-1)
/// (the number of T^(m-1-d) blocks formed over the whole run):
///   flops  = sum_d 2 n̄ w_d b_a^{m-d} b_c^{d+1}
///   memops = sum_d w_d (n̄ b_a^{m-d} b_c^d + 2 b_a^{m-d-1} b_c^{d+1})
inline CostReport bcss_costs(std::uint64_t m, std::uint64_t n, std::uint64_t p,
                             std::uint64_t b_a, std::uint64_t b_c,
                             std::uint64_t meta_k = 0) {
  detail::require_order(m);
  detail::require_divides(b_a, n, "A");
  detail::require_divides(b_c, p, "C");
  const std::uint64_t nbar = n / b_a;
  const std::uint64_t pbar = p / b_c;

  CostReport r;
  r.variant = Variant::Bcss;
  r.params = {m, n, p, b_a, b_c, meta_k};
  r.storage_a = checked_add(checked_mul(checked_pow(b_a, m), simplex_count(nbar, m)),
                            checked_mul(checked_pow(nbar, m), meta_k));
  r.storage_c = checked_add(checked_mul(checked_pow(b_c, m), simplex_count(pbar, m)),
                            checked_mul(checked_pow(pbar, m), meta_k));
  r.storage_x = checked_mul(p, n);
  for (std::uint64_t d = 0; d + 2 <= m; ++d) {
    const std::uint64_t blocks = binomial(nbar + m - d - 2, m - d - 1);
    const std::uint64_t size =
        checked_mul(checked_pow(b_a, m - 1 - d), checked_pow(b_c, d + 1));
    r.storage_temps = checked_add(r.storage_temps, checked_mul(blocks, size));
    r.storage_temps_meta =
        checked_add(r.storage_temps_meta, checked_mul(checked_pow(nbar, d + 1), meta_k));
  }
  for (std::uint64_t d = 0; d < m; ++d) {
    const std::uint64_t w = checked_mul(binomial(pbar + d, d + 1),
                                        binomial(nbar + m - d - 2, m - d - 1));
    const std::uint64_t in_block =
        checked_mul(checked_pow(b_a, m - d), checked_pow(b_c, d));
    const std::uint64_t out_block =
        checked_mul(checked_pow(b_a, m - d - 1), checked_pow(b_c, d + 1));
    r.flops = checked_add(
        r.flops, checked_mul(checked_mul(2 * nbar, w), checked_mul(in_block, b_c)));
    r.memops = checked_add(
        r.memops, checked_mul(w, checked_add(checked_mul(nbar, in_block),
                                             checked_mul(2, out_block))));
  }
  return r;
}

/// Dense chain of m mode products (no symmetry, no blocking).
///   flops  = sum_{d<m} 2 p^{d+1} n^{m-d}
///   memops = sum_{d<m} (p^d n^{m-d} + 2 p^{d+1} n^{m-d-1})
///   temps  = sum_{d<m-1} p^{d+1} n^{m-1-d}
inline CostReport dense_costs(std::uint64_t m, std::uint64_t n,
                              std::uint64_t p) {
  detail::require_order(m);
  if (n == 0 || p == 0) throw ParameterError("dimensions must be positive");
  CostReport r;
  r.variant = Variant::Dense;
  r.params = {m, n, p, n, p, 0};
  r.storage_a = checked_pow(n, m);
  r.storage_c = checked_pow(p, m);
  r.storage_x = checked_mul(p, n);
  for (std::uint64_t d = 0; d + 2 <= m; ++d) {
    r.storage_temps = checked_add(
        r.storage_temps, checked_mul(checked_pow(p, d + 1), checked_pow(n, m - 1 - d)));
  }
  for (std::uint64_t d = 0; d < m; ++d) {
    const std::uint64_t in = checked_mul(checked_pow(p, d), checked_pow(n, m - d));
    const std::uint64_t out =
        checked_mul(checked_pow(p, d + 1), checked_pow(n, m - d - 1));
    r.flops = checked_add(r.flops, checked_mul(2 * p, in));
    r.memops = checked_add(r.memops, checked_add(in, checked_mul(2, out)));
  }
  return r;
}

/// Algorithm-by-blocks that forms every block of every temporary:
///   sum_{d<m} 2 b_c^{d+1} n^{m-d} C(p̄+d, d+1).
inline std::uint64_t blocked_flops_without_reuse(std::uint64_t m,
                                                 std::uint64_t n,
                                                 std::uint64_t p,
                                                 std::uint64_t b_c) {
  detail::require_order(m);
  detail::require_divides(b_c, p, "C");
  const std::uint64_t pbar = p / b_c;
  std::uint64_t f = 0;
  for (std::uint64_t d = 0; d < m; ++d) {
    f = checked_add(f, checked_mul(checked_mul(2 * binomial(pbar + d, d + 1),
                                               checked_pow(b_c, d + 1)),
                                   checked_pow(n, m - d)));
  }
  return f;
}

/// Temporary storage of the same algorithm: sum_{d<m-1} b_c^{d+1} n^{m-1-d}.
inline std::uint64_t blocked_temps_without_reuse(std::uint64_t m,
                                                 std::uint64_t n,
                                                 std::uint64_t b_c) {
  detail::require_order(m);
  std::uint64_t s = 0;
  for (std::uint64_t d = 0; d + 2 <= m; ++d) {
    s = checked_add(s, checked_mul(checked_pow(b_c, d + 1), checked_pow(n, m - 1 - d)));
  }
  return s;
}

/// Scalar loops with temporaries: the blocked count with b_c = 1.
inline std::uint64_t scalar_temps_flops(std::uint64_t m, std::uint64_t n,
                                        std::uint64_t p) {
  return blocked_flops_without_reuse(m, n, p, 1);
}

/// Scalar loop nest: (m+1) flops per term, n^m terms per computed entry.
inline std::uint64_t naive_flops(std::uint64_t m, std::uint64_t n,
                                 std::uint64_t p, bool full_nest = false) {
  detail::require_order(m);
  const std::uint64_t entries = full_nest ? checked_pow(p, m) : simplex_count(p, m);
  return checked_mul(checked_mul(m + 1, checked_pow(n, m)), entries);
}

/// (m+1)!/2^m: the dense/BCSS flop ratio as usually quoted.
inline double speedup_limit(std::uint64_t m) {
  return static_cast<double>(factorial(m + 1)) / std::ldexp(1.0, static_cast<int>(m));
}

/// m * m! / 2^m.
inline double flop_ratio_constant(std::uint64_t m) {
  return static_cast<double>(m) * static_cast<double>(factorial(m)) /
         std::ldexp(1.0, static_cast<int>(m));
}

/// m * m! / (2^m - 1): the n -> infinity limit of the exact dense/BCSS flop
/// ratio at b = 1, n = p. The BCSS sum collapses (Vandermonde) to
/// 2n [C(2n+m-1, m) - C(n+m-1, m)] ~ 2 n^{m+1} (2^m - 1) / m!.
inline double flop_ratio_limit(std::uint64_t m) {
  return static_cast<double>(m) * static_cast<double>(factorial(m)) /
         (std::ldexp(1.0, static_cast<int>(m)) - 1.0);
}

/// Leading-order costs for n = p and b_a = b_c.
struct ApproxCosts {
  double bcss_storage;
  double bcss_temps;
  double bcss_flops;
  double bcss_memops;
  double dense_storage;
  double dense_temps;
  double dense_flops;
  double dense_memops;
  double speedup_limit;
};

inline ApproxCosts approx_costs(std::uint64_t m, std::uint64_t n,
                                std::uint64_t p, std::uint64_t b_a,
                                std::uint64_t b_c) {
  detail::require_order(m);
  if (n != p || b_a != b_c) {
    throw ParameterError("approximations assume n = p and b_A = b_C");
  }
  detail::require_divides(b_a, n, "A");
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double fact = static_cast<double>(factorial(m));
  const double nbar = static_cast<double>(n / b_a);
  const double nm = std::pow(nd, md);
  const double two_n_m = std::pow(2.0 * nd, md);
  ApproxCosts c{};
  c.bcss_storage = std::pow(static_cast<double>(b_a), md) *
                   static_cast<double>(simplex_count(n / b_a, m));
  c.bcss_temps = nm / fact;
  c.bcss_flops = std::pow(2.0 * nd, md + 1.0) / fact;
  c.bcss_memops = (nbar + 2.0) * two_n_m / fact;
  c.dense_storage = nm;
  c.dense_temps = (md - 1.0) * nm;
  c.dense_flops = 2.0 * md * nm * nd;
  c.dense_memops = 3.0 * md * nm;
  c.speedup_limit = speedup_limit(m);
  return c;
}

/// Storage ratios of BCSS payload against minimal (element-level compact)
/// and dense storage.
struct SavingsRow {
  std::uint64_t b = 0;
  std::uint64_t nbar = 0;
  double minimal_over_bcss = 0.0;
  double dense_over_bcss = 0.0;
};

inline SavingsRow savings_table(std::uint64_t m, std::uint64_t n,
                                std::uint64_t b) {
  detail::require_divides(b, n, "A");
  const std::uint64_t nbar = n / b;
  const double payload = static_cast<double>(
      checked_mul(checked_pow(b, m), simplex_count(nbar, m)));
  return {b, nbar, static_cast<double>(simplex_count(n, m)) / payload,
          static_cast<double>(checked_pow(n, m)) / payload};
}

inline std::vector<std::uint64_t> divisors(std::uint64_t n) {
  std::vector<std::uint64_t> d;
  for (std::uint64_t b = 1; b <= n; ++b) {
    if (n % b == 0) d.push_back(b);
  }
  return d;
}

struct StoragePoint {
  std::uint64_t b = 0;
  std::uint64_t nbar = 0;
  std::uint64_t payload = 0;
  std::uint64_t meta_entries = 0;
  double total_with_meta = 0.0;
  std::uint64_t dense = 0;
};

struct MetadataSweep {
  std::vector<StoragePoint> points;
  std::size_t argmin = 0;
};

/// k n̄^m + b^m C(n̄+m-1, m) for every divisor b of n.
inline MetadataSweep metadata_sweep(std::uint64_t m, std::uint64_t n,
                                    double meta_k) {
  if (m == 0 || n == 0) throw ParameterError("order and dimension must be positive");
  MetadataSweep s;
  for (std::uint64_t b : divisors(n)) {
    StoragePoint pt;
    pt.b = b;
    pt.nbar = n / b;
    pt.payload = checked_mul(checked_pow(b, m), simplex_count(pt.nbar, m));
    pt.meta_entries = checked_pow(pt.nbar, m);
    pt.total_with_meta = static_cast<double>(pt.payload) +
                         meta_k * static_cast<double>(pt.meta_entries);
    pt.dense = checked_pow(n, m);
    s.points.push_back(pt);
  }
  for (std::size_t i = 1; i < s.points.size(); ++i) {
    if (s.points[i].total_with_meta < s.points[s.argmin].total_with_meta) {
      s.argmin = i;
    }
  }
  return s;
}

/// n^{m/2} (k + n^{m/2}/m!): leading-order total at b = sqrt(n).
inline double sqrt_block_storage_estimate(std::uint64_t m, std::uint64_t n,
                                          double meta_k) {
  const double h = std::pow(static_cast<double>(n), static_cast<double>(m) / 2.0);
  return h * (meta_k + h / static_cast<double>(factorial(m)));
}

struct CrossoverPoint {
  std::uint64_t b = 0;
  std::uint64_t flops = 0;
  std::uint64_t memops = 0;
};

/// BCSS flops and memops for b_a = b_c = b over the common divisors of n, p.
inline std::vector<CrossoverPoint> crossover_table(std::uint64_t m,
                                                   std::uint64_t n,
                                                   std::uint64_t p) {
  std::vector<CrossoverPoint> out;
  for (std::uint64_t b : divisors(n)) {
    if (p % b != 0) continue;
    const CostReport r = bcss_costs(m, n, p, b, b);
    out.push_back({b, r.flops, r.memops});
  }
  return out;
}

}  // namespace symtensor
