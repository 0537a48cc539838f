#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "symtensor.hpp"

namespace symtensor::testing {

inline DenseTensor random_dense(Dims dims, std::uint64_t seed) {
  UniformStream s(seed);
  DenseTensor t(std::move(dims));
  for (double& v : t.data()) v = s.next();
  return t;
}

inline Permutation random_permutation(std::size_t m, std::mt19937_64& rng) {
  std::vector<std::size_t> p(m);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return Permutation(std::move(p));
}

/// Every index of the box, in dimensional order.
inline std::vector<MultiIndex> all_indices(const Dims& dims) {
  std::vector<MultiIndex> out;
  MultiIndex idx(dims.size(), 0);
  const std::size_t total = element_count(dims);
  for (std::size_t lin = 0; lin < total; ++lin) {
    out.push_back(idx);
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (++idx[k] < dims[k]) break;
      idx[k] = 0;
    }
  }
  return out;
}

/// gamma_j = sum_i alpha_i prod_q chi(j_q, i_q), straight from the
/// definition over every output and every input index.
inline DenseTensor brute_force_sttsm(const DenseTensor& a, const DenseTensor& x) {
  const std::size_t m = a.order();
  const std::size_t p = x.dim(0);
  DenseTensor c(Dims(m, p));
  const auto in = all_indices(a.dims());
  const auto outs = all_indices(c.dims());
  for (std::size_t o = 0; o < outs.size(); ++o) {
    double sum = 0.0;
    for (std::size_t l = 0; l < in.size(); ++l) {
      double term = a[l];
      for (std::size_t q = 0; q < m; ++q) term *= x(outs[o][q], in[l][q]);
      sum += term;
    }
    c[o] = sum;
  }
  return c;
}

}  // namespace symtensor::testing
