#pragma once

// Seeded symmetric inputs. The unique entries of A are drawn first, in
// hypertriangle order, then X column by column; the dense and the BCSS
// constructions consume the same stream, so compress(dense) == bcss bitwise.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "symtensor/bcss.hpp"
#include "symtensor/dense.hpp"
#include "symtensor/sttsm.hpp"
#include "symtensor/sym_index.hpp"

namespace symtensor {

/// Uniform(-1, 1) doubles from mt19937_64, 53 random bits each.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : eng_(seed) {}

  double next() {
    const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
  }

  void discard(std::uint64_t count) { eng_.discard(count); }

 private:
  std::mt19937_64 eng_;
};

inline std::vector<double> random_unique_entries(UniformStream& s,
                                                 std::size_t m, std::size_t n) {
  std::vector<double> v(static_cast<std::size_t>(simplex_count(n, m)));
  for (double& x : v) x = s.next();
  return v;
}

/// Dense symmetric tensor from entries listed in hypertriangle order.
inline DenseTensor symmetric_from_unique(std::span<const double> unique,
                                         std::size_t m, std::size_t n) {
  if (unique.size() != simplex_count(n, m)) {
    throw ShapeError("expected " + std::to_string(simplex_count(n, m)) +
                     " unique entries, got " + std::to_string(unique.size()));
  }
  DenseTensor t(Dims(m, n));
  const auto strides = dimensional_strides(t.dims());
  std::size_t r = 0;
  for_each_hypertriangle(n, m, [&](const MultiIndex& idx) {
    std::size_t off = 0;
    for (std::size_t q = 0; q < m; ++q) off += idx[q] * strides[q];
    t[off] = unique[r++];
  });
  detail::replicate_from_canonical(t);
  return t;
}

/// BCSS tensor built straight from the unique entries, without a dense copy.
inline BcssTensor bcss_from_unique(std::span<const double> unique,
                                   std::size_t m, std::size_t n,
                                   std::size_t block_dim) {
  if (unique.size() != simplex_count(n, m)) {
    throw ShapeError("expected " + std::to_string(simplex_count(n, m)) +
                     " unique entries, got " + std::to_string(unique.size()));
  }
  BcssTensor a(m, n, block_dim);
  const HypertriangleRanker rank(n, m);
  const Dims& bdims = a.storage().block_dims();
  MultiIndex local(m, 0);
  MultiIndex global(m);
  for (std::size_t slot = 0; slot < a.num_blocks(); ++slot) {
    const MultiIndex& key = a.block_key(slot);
    std::span<double> blk = a.block(slot);
    std::fill(local.begin(), local.end(), 0);
    for (double& out : blk) {
      for (std::size_t q = 0; q < m; ++q) global[q] = key[q] * block_dim + local[q];
      std::sort(global.begin(), global.end());
      out = unique[rank(global)];
      for (std::size_t q = 0; q < m; ++q) {
        if (++local[q] < bdims[q]) break;
        local[q] = 0;
      }
    }
  }
  return a;
}

inline DenseTensor random_matrix(UniformStream& s, std::size_t rows,
                                 std::size_t cols) {
  DenseTensor x = DenseTensor::matrix(rows, cols);
  for (double& v : x.data()) v = s.next();
  return x;
}

/// One seeded sttsm input: the unique entries of A and the p x n matrix X.
struct RandomProblem {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> unique;
  DenseTensor x;

  DenseTensor dense_a() const { return symmetric_from_unique(unique, m, n); }
  BcssTensor bcss_a(std::size_t block_dim) const {
    return bcss_from_unique(unique, m, n, block_dim);
  }
};

inline RandomProblem random_problem(std::uint64_t seed, std::size_t m,
                                    std::size_t n, std::size_t p) {
  UniformStream s(seed);
  RandomProblem pr;
  pr.m = m;
  pr.n = n;
  pr.p = p;
  pr.unique = random_unique_entries(s, m, n);
  pr.x = random_matrix(s, p, n);
  return pr;
}

inline DenseTensor random_symmetric(std::uint64_t seed, std::size_t m,
                                    std::size_t n) {
  UniformStream s(seed);
  return symmetric_from_unique(random_unique_entries(s, m, n), m, n);
}

}  // namespace symtensor
