#pragma once

// Blocked Compact Symmetric Storage.
//
// A tensor whose leading s modes (dimension n) are symmetric is cut into
// blocks of b along those modes. Only blocks whose symmetric block index is
// nondecreasing are stored; every position of the dense n̄^s block grid keeps
// a small record naming the stored block and the mode permutation that turns
// it into the requested one. Tail modes (s..m-1) are not blocked: each has a
// single extent shared by every block. s == m is the fully symmetric case.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "symtensor/dense.hpp"
#include "symtensor/errors.hpp"
#include "symtensor/sym_index.hpp"

namespace symtensor {

inline constexpr std::size_t kMaxOrder = 12;

/// One meta-grid record: which stored block, and how to permute it.
struct MetaEntry {
  std::uint32_t slot = 0;
  std::array<std::uint8_t, kMaxOrder> perm{};
};

/// Element counts of a BCSS object: the stored payload, and the payload plus
/// meta-data priced at `meta_words` floats per grid entry.
struct StorageCount {
  std::uint64_t payload = 0;
  double total_with_meta = 0.0;
};

class PartialSymTensor {
 public:
  /// Meta-data cost per grid entry, in double-precision words.
  static constexpr double meta_words_per_entry =
      static_cast<double>(sizeof(MetaEntry)) / sizeof(double);

  PartialSymTensor() = default;

  /// Zero-filled storage holding only canonical blocks.
  PartialSymTensor(std::size_t order, std::size_t sym_modes, std::size_t n,
                   std::size_t block_dim, std::size_t tail_dim)
      : PartialSymTensor(order, sym_modes, n, block_dim, tail_dim, true) {}

  /// Zero-filled storage holding every block of the grid, each referenced by
  /// an identity record. Used when symmetry is deliberately not exploited.
  static PartialSymTensor full_grid(std::size_t order, std::size_t sym_modes,
                                    std::size_t n, std::size_t block_dim,
                                    std::size_t tail_dim) {
    return PartialSymTensor(order, sym_modes, n, block_dim, tail_dim, false);
  }

  std::size_t order() const noexcept { return order_; }
  std::size_t sym_modes() const noexcept { return sym_; }
  std::size_t dim() const noexcept { return n_; }
  std::size_t block_dim() const noexcept { return b_; }
  std::size_t grid_extent() const noexcept { return nbar_; }
  std::size_t tail_dim() const noexcept { return tail_; }
  bool is_compressed() const noexcept { return compressed_; }

  /// b along symmetric modes, tail_dim along the rest.
  const Dims& block_dims() const noexcept { return block_dims_; }
  std::size_t block_size() const noexcept { return block_size_; }
  std::size_t num_blocks() const noexcept { return keys_.size(); }
  std::size_t meta_entry_count() const noexcept { return meta_.size(); }
  std::size_t payload_size() const noexcept { return data_.size(); }
  std::size_t meta_bytes() const noexcept {
    return meta_.size() * sizeof(MetaEntry);
  }

  /// Dims of the logical dense tensor.
  Dims dense_dims() const {
    Dims d(order_, tail_);
    for (std::size_t q = 0; q < sym_; ++q) d[q] = n_;
    return d;
  }

  const MultiIndex& block_key(std::size_t slot) const { return keys_.at(slot); }

  std::span<const double> block(std::size_t slot) const {
    return {data_.data() + slot * block_size_, block_size_};
  }
  std::span<double> block(std::size_t slot) {
    return {data_.data() + slot * block_size_, block_size_};
  }

  std::span<const double> payload() const noexcept { return data_; }
  std::span<double> payload() noexcept { return data_; }

  const MetaEntry& meta(std::span<const std::size_t> sym_idx) const {
    return meta_[grid_offset(sym_idx)];
  }

  std::size_t slot_of(std::span<const std::size_t> sym_idx) const {
    return meta(sym_idx).slot;
  }

  /// The record at sym_idx, permutation extended by identity over the tail.
  Permutation applied_permutation(std::span<const std::size_t> sym_idx) const {
    return expand(meta(sym_idx));
  }

  CanonicalRef canonical_ref(std::span<const std::size_t> sym_idx) const {
    const MetaEntry& e = meta(sym_idx);
    std::vector<std::size_t> p(sym_);
    for (std::size_t q = 0; q < sym_; ++q) p[q] = e.perm[q];
    return {keys_[e.slot], Permutation(std::move(p))};
  }

  /// The block at sym_idx of the logical tensor, materialized.
  DenseTensor block_at(std::span<const std::size_t> sym_idx) const {
    const MetaEntry& e = meta(sym_idx);
    DenseTensor out(block_dims_);
    const auto strides = dimensional_strides(block_dims_);
    detail::permute_into(data_.data() + e.slot * block_size_, block_dims_,
                         expand(e), out.data().data(), strides);
    return out;
  }

  std::size_t grid_offset(std::span<const std::size_t> sym_idx) const {
    if (sym_idx.size() != sym_) {
      throw ShapeError("block index " + to_string(sym_idx) + " needs " +
                       std::to_string(sym_) + " entries");
    }
    std::size_t off = 0;
    std::size_t stride = 1;
    for (std::size_t q = 0; q < sym_; ++q) {
      if (sym_idx[q] >= nbar_) {
        throw RangeError("block index " + to_string(sym_idx) +
                         " outside grid of extent " + std::to_string(nbar_));
      }
      off += sym_idx[q] * stride;
      stride *= nbar_;
    }
    return off;
  }

 private:
  PartialSymTensor(std::size_t order, std::size_t sym_modes, std::size_t n,
                   std::size_t block_dim, std::size_t tail_dim, bool compressed)
      : order_(order),
        sym_(sym_modes),
        n_(n),
        b_(block_dim),
        tail_(tail_dim),
        compressed_(compressed) {
    if (order_ == 0 || order_ > kMaxOrder) {
      throw ParameterError("order must be in [1, " + std::to_string(kMaxOrder) +
                           "], got " + std::to_string(order_));
    }
    if (sym_ > order_) throw ParameterError("more symmetric modes than modes");
    if (b_ == 0 || n_ == 0 || n_ % b_ != 0) {
      throw BlockDivisibilityError("block dimension " + std::to_string(b_) +
                                   " does not divide " + std::to_string(n_));
    }
    if (tail_ == 0) throw ParameterError("tail dimension must be positive");
    nbar_ = n_ / b_;
    block_dims_.assign(order_, tail_);
    for (std::size_t q = 0; q < sym_; ++q) block_dims_[q] = b_;
    block_size_ = element_count(block_dims_);

    const Dims grid(sym_, nbar_);
    const std::size_t grid_size = element_count(grid);
    meta_.resize(grid_size);
    if (compressed_) {
      for_each_hypertriangle(nbar_, sym_, [&](const MultiIndex& key) {
        MetaEntry& e = meta_[grid_offset(key)];
        e.slot = next_slot(key);
        for (std::size_t q = 0; q < sym_; ++q) e.perm[q] = static_cast<std::uint8_t>(q);
      });
      MultiIndex g(sym_, 0);
      for (std::size_t off = 0; off < grid_size; ++off) {
        if (!is_nondecreasing(g)) {
          const CanonicalRef ref = canonicalize(g);
          MetaEntry& e = meta_[off];
          e.slot = meta_[grid_offset(ref.canonical)].slot;
          for (std::size_t q = 0; q < sym_; ++q) {
            e.perm[q] = static_cast<std::uint8_t>(ref.applied[q]);
          }
        }
        advance(g);
      }
    } else {
      MultiIndex g(sym_, 0);
      for (std::size_t off = 0; off < grid_size; ++off) {
        MetaEntry& e = meta_[off];
        e.slot = next_slot(g);
        for (std::size_t q = 0; q < sym_; ++q) e.perm[q] = static_cast<std::uint8_t>(q);
        advance(g);
      }
    }
    data_.assign(checked_mul(keys_.size(), block_size_), 0.0);
  }

  std::uint32_t next_slot(const MultiIndex& key) {
    if (keys_.size() >= std::numeric_limits<std::uint32_t>::max()) {
      throw ParameterError("too many blocks");
    }
    keys_.push_back(key);
    return static_cast<std::uint32_t>(keys_.size() - 1);
  }

  void advance(MultiIndex& g) const {
    for (std::size_t q = 0; q < g.size(); ++q) {
      if (++g[q] < nbar_) return;
      g[q] = 0;
    }
  }

  Permutation expand(const MetaEntry& e) const {
    std::vector<std::size_t> p(order_);
    for (std::size_t q = 0; q < order_; ++q) p[q] = q < sym_ ? e.perm[q] : q;
    return Permutation(std::move(p));
  }

  std::size_t order_ = 0;
  std::size_t sym_ = 0;
  std::size_t n_ = 0;
  std::size_t b_ = 0;
  std::size_t nbar_ = 0;
  std::size_t tail_ = 0;
  bool compressed_ = true;
  Dims block_dims_;
  std::size_t block_size_ = 0;
  std::vector<MultiIndex> keys_;
  std::vector<MetaEntry> meta_;
  std::vector<double> data_;
};

/// Fully symmetric order-m tensor of dimension n in BCSS with block dim b.
class BcssTensor {
 public:
  BcssTensor() = default;

  BcssTensor(std::size_t order, std::size_t n, std::size_t block_dim)
      : storage_(order, order, n, block_dim, block_dim) {}

  explicit BcssTensor(PartialSymTensor storage) : storage_(std::move(storage)) {
    if (storage_.sym_modes() != storage_.order() || !storage_.is_compressed()) {
      throw ParameterError("BCSS storage must be symmetric in every mode");
    }
  }

  std::size_t order() const noexcept { return storage_.order(); }
  std::size_t dim() const noexcept { return storage_.dim(); }
  std::size_t block_dim() const noexcept { return storage_.block_dim(); }
  std::size_t grid_extent() const noexcept { return storage_.grid_extent(); }
  std::size_t num_blocks() const noexcept { return storage_.num_blocks(); }
  std::size_t block_size() const noexcept { return storage_.block_size(); }
  std::size_t payload_size() const noexcept { return storage_.payload_size(); }
  std::size_t meta_entry_count() const noexcept {
    return storage_.meta_entry_count();
  }

  const MultiIndex& block_key(std::size_t slot) const {
    return storage_.block_key(slot);
  }
  std::span<const double> block(std::size_t slot) const {
    return storage_.block(slot);
  }
  std::span<double> block(std::size_t slot) { return storage_.block(slot); }
  std::size_t slot_of(std::span<const std::size_t> idx) const {
    return storage_.slot_of(idx);
  }
  CanonicalRef canonical_ref(std::span<const std::size_t> idx) const {
    return storage_.canonical_ref(idx);
  }
  DenseTensor block_at(std::span<const std::size_t> idx) const {
    return storage_.block_at(idx);
  }

  /// Payload b^m * C(n̄+m-1, m) and payload + meta_words * n̄^m.
  StorageCount stored_element_count(double meta_words) const {
    return {payload_size(),
            static_cast<double>(payload_size()) +
                meta_words * static_cast<double>(meta_entry_count())};
  }

  const PartialSymTensor& storage() const noexcept { return storage_; }
  PartialSymTensor& storage() noexcept { return storage_; }

 private:
  PartialSymTensor storage_;
};

// ---------------------------------------------------------------------------

namespace detail {

/// Compares every element with its representative (leading s index entries
/// sorted) and reports the worst offending pair.
inline void check_leading_symmetry(const DenseTensor& t, std::size_t s,
                                   double tol) {
  if (s < 2) return;
  const std::size_t m = t.order();
  const auto strides = dimensional_strides(t.dims());
  MultiIndex idx(m, 0);
  MultiIndex sorted(m, 0);
  bool found = false;
  double worst = 0.0;
  std::size_t worst_lin = 0;
  std::size_t worst_partner = 0;
  for (std::size_t lin = 0; lin < t.size(); ++lin) {
    std::copy(idx.begin(), idx.end(), sorted.begin());
    std::sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(s));
    std::size_t off = 0;
    for (std::size_t q = 0; q < m; ++q) off += sorted[q] * strides[q];
    if (off != lin) {
      const double a = t[lin];
      const double b = t[off];
      const double diff = std::abs(a - b);
      if (diff > tol * std::max(std::abs(a), std::abs(b))) {
        const double scale = std::max(std::abs(a), std::abs(b));
        const double rel = scale > 0.0 ? diff / scale : diff;
        if (!found || rel > worst) {
          found = true;
          worst = rel;
          worst_lin = lin;
          worst_partner = off;
        }
      }
    }
    for (std::size_t k = 0; k < m; ++k) {
      if (++idx[k] < t.dim(k)) break;
      idx[k] = 0;
    }
  }
  if (found) {
    auto unravel = [&](std::size_t lin) {
      MultiIndex i(m);
      for (std::size_t k = 0; k < m; ++k) {
        i[k] = lin % t.dim(k);
        lin /= t.dim(k);
      }
      return to_string(i);
    };
    const std::string a = unravel(worst_lin);
    const std::string b = unravel(worst_partner);
    throw SymmetryError("tensor is not symmetric: entries " + a + " and " + b +
                            " differ by relative " + std::to_string(worst),
                        a, b, worst);
  }
}

inline void copy_blocks_from_dense(const DenseTensor& t, PartialSymTensor& a) {
  const auto strides = dimensional_strides(t.dims());
  const std::size_t b = a.block_dim();
  const double* src = t.data().data();
  for (std::size_t slot = 0; slot < a.num_blocks(); ++slot) {
    const MultiIndex& key = a.block_key(slot);
    std::size_t base = 0;
    for (std::size_t q = 0; q < key.size(); ++q) base += key[q] * b * strides[q];
    double* dst = a.block(slot).data();
    for_each_strided(a.block_dims(), strides,
                     [&](std::size_t lin, std::size_t off) {
                       dst[lin] = src[base + off];
                     });
  }
}

}  // namespace detail

/// Stores the unique blocks of t, whose leading s modes (dimension n) are
/// symmetric and whose remaining modes share one dimension.
inline PartialSymTensor compress_partial(const DenseTensor& t, std::size_t s,
                                         std::size_t block_dim,
                                         double tol = 0.0) {
  const std::size_t m = t.order();
  if (s == 0 || s > m) {
    throw ParameterError("symmetric mode count " + std::to_string(s) +
                         " invalid for order " + std::to_string(m));
  }
  const std::size_t n = t.dim(0);
  for (std::size_t q = 1; q < s; ++q) {
    if (t.dim(q) != n) {
      throw ShapeError("symmetric modes must share one dimension; dims " +
                       to_string(t.dims()));
    }
  }
  const std::size_t tail = s < m ? t.dim(s) : block_dim;
  for (std::size_t q = s; q < m; ++q) {
    if (t.dim(q) != tail) {
      throw ShapeError("tail modes must share one dimension; dims " +
                       to_string(t.dims()));
    }
  }
  if (block_dim == 0 || n % block_dim != 0) {
    throw BlockDivisibilityError("block dimension " + std::to_string(block_dim) +
                                 " does not divide " + std::to_string(n));
  }
  detail::check_leading_symmetry(t, s, tol);
  PartialSymTensor a(m, s, n, block_dim, tail);
  detail::copy_blocks_from_dense(t, a);
  return a;
}

inline DenseTensor decompress_partial(const PartialSymTensor& a) {
  DenseTensor t(a.dense_dims());
  const auto strides = dimensional_strides(t.dims());
  const std::size_t s = a.sym_modes();
  const std::size_t b = a.block_dim();
  MultiIndex g(s, 0);
  const std::size_t grid = a.meta_entry_count();
  for (std::size_t cell = 0; cell < grid; ++cell) {
    std::size_t base = 0;
    for (std::size_t q = 0; q < s; ++q) base += g[q] * b * strides[q];
    const MetaEntry& e = a.meta(g);
    detail::permute_into(a.block(e.slot).data(), a.block_dims(),
                         a.applied_permutation(g), t.data().data() + base,
                         strides);
    for (std::size_t q = 0; q < s; ++q) {
      if (++g[q] < a.grid_extent()) break;
      g[q] = 0;
    }
  }
  return t;
}

inline DenseTensor partial_block_at(const PartialSymTensor& a,
                                    std::span<const std::size_t> sym_idx) {
  return a.block_at(sym_idx);
}

/// BCSS copy of a fully symmetric tensor t (all dims n, b | n).
inline BcssTensor compress(const DenseTensor& t, std::size_t block_dim,
                           double tol = 0.0) {
  for (std::size_t q = 1; q < t.order(); ++q) {
    if (t.dim(q) != t.dim(0)) {
      throw ShapeError("symmetric tensor needs equal dims, got " +
                       to_string(t.dims()));
    }
  }
  return BcssTensor(compress_partial(t, t.order(), block_dim, tol));
}

inline DenseTensor decompress(const BcssTensor& a) {
  return decompress_partial(a.storage());
}

inline DenseTensor block_at(const BcssTensor& a,
                            std::span<const std::size_t> idx) {
  return a.block_at(idx);
}

inline StorageCount stored_element_count(const BcssTensor& a,
                                         double meta_words) {
  return a.stored_element_count(meta_words);
}

}  // namespace symtensor
