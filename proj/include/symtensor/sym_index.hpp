#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "symtensor/checked.hpp"
#include "symtensor/dense.hpp"
#include "symtensor/errors.hpp"

namespace symtensor {

/// Sorted representative of an index together with the permutation that
/// recovers the queried index from it: applied.apply(canonical) == index.
struct CanonicalRef {
  MultiIndex canonical;
  Permutation applied;
};

/// Sorts idx into nondecreasing order. Among the permutations mapping the
/// sorted index back to idx, the lexicographically smallest one is chosen.
inline CanonicalRef canonicalize(std::span<const std::size_t> idx) {
  CanonicalRef ref;
  ref.canonical.assign(idx.begin(), idx.end());
  std::sort(ref.canonical.begin(), ref.canonical.end());
  const std::size_t m = idx.size();
  std::vector<std::size_t> mapping(m);
  std::vector<bool> used(m, false);
  for (std::size_t q = 0; q < m; ++q) {
    // Smallest unused position r holding the wanted value.
    auto first = std::lower_bound(ref.canonical.begin(), ref.canonical.end(),
                                  idx[q]);
    auto r = static_cast<std::size_t>(first - ref.canonical.begin());
    while (used[r]) ++r;
    used[r] = true;
    mapping[q] = r;
  }
  ref.applied = Permutation(std::move(mapping));
  return ref;
}

inline bool is_nondecreasing(std::span<const std::size_t> idx) {
  return std::is_sorted(idx.begin(), idx.end());
}

/// C(n + m - 1, m): nondecreasing m-tuples over n values.
inline std::uint64_t simplex_count(std::uint64_t n, std::uint64_t m) {
  if (m == 0) return 1;
  if (n == 0) return 0;
  return binomial(checked_add(n, m - 1), m);
}

/// Advances a nondecreasing tuple to its lexicographic successor over
/// {0, ..., extent-1}. Returns false after the last tuple.
inline bool next_nondecreasing(MultiIndex& idx, std::size_t extent) {
  for (std::size_t q = idx.size(); q-- > 0;) {
    if (idx[q] + 1 < extent) {
      const std::size_t v = idx[q] + 1;
      for (std::size_t r = q; r < idx.size(); ++r) idx[r] = v;
      return true;
    }
  }
  return false;
}

/// Every nondecreasing m-tuple over {0, ..., extent-1}, in lexicographic
/// order. fn receives a const MultiIndex&.
template <class Fn>
void for_each_hypertriangle(std::size_t extent, std::size_t m, Fn&& fn) {
  if (extent == 0) return;
  MultiIndex idx(m, 0);
  do {
    fn(std::as_const(idx));
  } while (next_nondecreasing(idx, extent));
}

inline std::vector<MultiIndex> hypertriangle(std::size_t extent,
                                             std::size_t m) {
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>(simplex_count(extent, m)));
  for_each_hypertriangle(extent, m,
                         [&](const MultiIndex& i) { out.push_back(i); });
  return out;
}

/// Position of a nondecreasing tuple in the hypertriangle_iter order.
inline std::uint64_t hypertriangle_rank(std::span<const std::size_t> idx,
                                        std::size_t extent) {
  const std::size_t m = idx.size();
  std::uint64_t rank = 0;
  std::size_t lo = 0;
  for (std::size_t q = 0; q < m; ++q) {
    if (idx[q] < lo || idx[q] >= extent) {
      throw RangeError("not a nondecreasing index below " +
                       std::to_string(extent) + ": " + to_string(idx));
    }
    const std::size_t rest = m - q - 1;
    // Tuples that agree on the prefix and put a smaller value v here.
    for (std::size_t v = lo; v < idx[q]; ++v) {
      rank += simplex_count(extent - v, rest);
    }
    lo = idx[q];
  }
  return rank;
}

/// O(m) hypertriangle_rank via per-position prefix sums; no range checks.
class HypertriangleRanker {
 public:
  HypertriangleRanker(std::size_t extent, std::size_t m)
      : extent_(extent), prefix_(m, std::vector<std::uint64_t>(extent + 1, 0)) {
    for (std::size_t q = 0; q < m; ++q) {
      for (std::size_t v = 0; v < extent; ++v) {
        prefix_[q][v + 1] = prefix_[q][v] + simplex_count(extent - v, m - q - 1);
      }
    }
  }

  std::uint64_t operator()(std::span<const std::size_t> sorted) const {
    std::uint64_t rank = 0;
    std::size_t lo = 0;
    for (std::size_t q = 0; q < sorted.size(); ++q) {
      rank += prefix_[q][sorted[q]] - prefix_[q][lo];
      lo = sorted[q];
    }
    return rank;
  }

  std::size_t extent() const noexcept { return extent_; }

 private:
  std::size_t extent_;
  std::vector<std::vector<std::uint64_t>> prefix_;
};

/// Disjoint, covering groups of modes S_0, ..., S_{k-1}.
class ModePartition {
 public:
  ModePartition(std::size_t order, std::vector<std::vector<std::size_t>> groups)
      : groups_(std::move(groups)) {
    std::vector<bool> seen(order, false);
    std::size_t covered = 0;
    for (const auto& g : groups_) {
      if (g.empty()) throw ParameterError("empty mode group");
      for (std::size_t k : g) {
        if (k >= order || seen[k]) {
          throw ParameterError("mode groups overlap or exceed the order");
        }
        seen[k] = true;
        ++covered;
      }
    }
    if (covered != order) throw ParameterError("mode groups do not cover all modes");
  }

  /// Modes [0, s) as one group, every remaining mode a singleton.
  static ModePartition leading_group(std::size_t order, std::size_t s) {
    std::vector<std::vector<std::size_t>> g;
    std::vector<std::size_t> head;
    for (std::size_t k = 0; k < s; ++k) head.push_back(k);
    if (!head.empty()) g.push_back(std::move(head));
    for (std::size_t k = s; k < order; ++k) g.push_back({k});
    return ModePartition(order, std::move(g));
  }

  const std::vector<std::vector<std::size_t>>& groups() const noexcept {
    return groups_;
  }

 private:
  std::vector<std::vector<std::size_t>> groups_;
};

namespace detail {

inline bool close_relative(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace detail

/// True iff t is invariant (within relative tol) under every permutation of
/// the modes in `modes`. Adjacent transpositions generate the group, so only
/// those are checked.
inline bool is_sym_in_modes(const DenseTensor& t,
                            std::span<const std::size_t> modes, double tol) {
  std::vector<std::size_t> s(modes.begin(), modes.end());
  std::sort(s.begin(), s.end());
  for (std::size_t k : s) {
    if (k >= t.order()) throw ModeError("mode " + std::to_string(k));
  }
  for (std::size_t r = 1; r < s.size(); ++r) {
    if (t.dim(s[r]) != t.dim(s[0])) {
      throw ShapeError("modes " + std::to_string(s[0]) + " and " +
                       std::to_string(s[r]) + " have different dimensions");
    }
  }
  if (s.size() < 2) return true;
  const auto strides = dimensional_strides(t.dims());
  const std::size_t m = t.order();
  MultiIndex idx(m, 0);
  for (std::size_t lin = 0; lin < t.size(); ++lin) {
    for (std::size_t r = 0; r + 1 < s.size(); ++r) {
      const std::size_t a = s[r];
      const std::size_t b = s[r + 1];
      if (idx[a] < idx[b]) {
        const std::size_t other = lin + (idx[b] - idx[a]) * strides[a] -
                                  (idx[b] - idx[a]) * strides[b];
        if (!detail::close_relative(t[lin], t[other], tol)) return false;
      }
    }
    for (std::size_t k = 0; k < m; ++k) {
      if (++idx[k] < t.dim(k)) break;
      idx[k] = 0;
    }
  }
  return true;
}

inline bool is_sym_in_modes(const DenseTensor& t,
                            std::initializer_list<std::size_t> modes,
                            double tol) {
  return is_sym_in_modes(t, std::span<const std::size_t>(modes.begin(), modes.size()), tol);
}

inline bool is_sym_in_partition(const DenseTensor& t, const ModePartition& p,
                                double tol) {
  for (const auto& g : p.groups()) {
    if (!is_sym_in_modes(t, g, tol)) return false;
  }
  return true;
}

/// Modes 0..m-1 as a list, for full-symmetry checks.
inline std::vector<std::size_t> leading_modes(std::size_t s) {
  std::vector<std::size_t> v(s);
  for (std::size_t k = 0; k < s; ++k) v[k] = k;
  return v;
}

}  // namespace symtensor
