#pragma once

// C := [A; X, ..., X], the symmetric tensor times the same matrix in every
// mode, for a symmetric order-m A of dimension n and a p x n matrix X:
//
//   gamma_{j_0..j_{m-1}} = sum_{i_0..i_{m-1}} alpha_{i_0..i_{m-1}}
//                          chi_{j_0 i_0} ... chi_{j_{m-1} i_{m-1}}
//
// Four routes: a scalar loop nest over the unique output entries, scalar
// loops with temporaries, a dense chain of mode products, and a blocked
// algorithm over BCSS operands whose temporaries keep their partial symmetry.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "symtensor/bcss.hpp"
#include "symtensor/dense.hpp"
#include "symtensor/errors.hpp"
#include "symtensor/sym_index.hpp"

namespace symtensor {

namespace detail {

struct SttsmShape {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t p = 0;
};

inline SttsmShape check_sttsm_operands(const Dims& a_dims,
                                       const DenseTensor& x) {
  const std::size_t m = a_dims.size();
  if (m < 2) {
    throw ParameterError("order must be at least 2, got " + std::to_string(m));
  }
  for (std::size_t q = 1; q < m; ++q) {
    if (a_dims[q] != a_dims[0]) {
      throw ShapeError("A must have equal dims, got " + to_string(a_dims));
    }
  }
  if (x.order() != 2) throw ShapeError("X must be a matrix");
  if (x.dim(1) != a_dims[0]) {
    throw ShapeError("X has " + std::to_string(x.dim(1)) +
                     " columns but A has dimension " + std::to_string(a_dims[0]));
  }
  return {m, a_dims[0], x.dim(0)};
}

/// Fills every non-canonical entry of a cube-shaped tensor from the entry at
/// its sorted index.
inline void replicate_from_canonical(DenseTensor& c) {
  const std::size_t m = c.order();
  const auto strides = dimensional_strides(c.dims());
  MultiIndex idx(m, 0);
  MultiIndex sorted(m, 0);
  for (std::size_t lin = 0; lin < c.size(); ++lin) {
    std::copy(idx.begin(), idx.end(), sorted.begin());
    std::sort(sorted.begin(), sorted.end());
    std::size_t off = 0;
    for (std::size_t q = 0; q < m; ++q) off += sorted[q] * strides[q];
    if (off != lin) c[lin] = c[off];
    for (std::size_t k = 0; k < m; ++k) {
      if (++idx[k] < c.dim(k)) break;
      idx[k] = 0;
    }
  }
}

/// dst[r] = sum_l src[r + l * rows] * x(j, l), l ascending.
inline void contract_last_mode(const double* src, std::size_t rows,
                               std::size_t n, const DenseTensor& x,
                               std::size_t j, double* dst) {
  const std::size_t p = x.dim(0);
  const double* xd = x.data().data();
  std::fill(dst, dst + rows, 0.0);
  for (std::size_t l = 0; l < n; ++l) {
    const double xjl = xd[j + l * p];
    const double* col = src + l * rows;
    for (std::size_t r = 0; r < rows; ++r) dst[r] += col[r] * xjl;
  }
}

}  // namespace detail

/// Scalar loop nest. Computes only entries with j_0 <= ... <= j_{m-1} and
/// replicates them; with full_nest every one of the p^m entries is summed
/// independently. Counts (m+1) flops per term.
inline DenseTensor sttsm_naive(const DenseTensor& a, const DenseTensor& x,
                               const ExecContext& ctx = {},
                               bool full_nest = false) {
  const auto [m, n, p] = detail::check_sttsm_operands(a.dims(), x);
  DenseTensor c = DenseTensor::cube(m, p);
  const auto c_strides = dimensional_strides(c.dims());
  const double* ad = a.data().data();
  const double* xd = x.data().data();
  const std::size_t outer = a.size() / n;

  std::uint64_t entries = 0;
  auto compute = [&](const MultiIndex& j) {
    // Inner loop over i_0; the remaining factors are formed per column.
    double sum = 0.0;
    MultiIndex i(m, 0);
    for (std::size_t col = 0; col < outer; ++col) {
      double rest = 1.0;
      for (std::size_t q = 1; q < m; ++q) rest *= xd[j[q] + i[q] * p];
      const double* acol = ad + col * n;
      for (std::size_t i0 = 0; i0 < n; ++i0) {
        sum += acol[i0] * (xd[j[0] + i0 * p] * rest);
      }
      for (std::size_t q = 1; q < m; ++q) {
        if (++i[q] < n) break;
        i[q] = 0;
      }
    }
    std::size_t off = 0;
    for (std::size_t q = 0; q < m; ++q) off += j[q] * c_strides[q];
    c[off] = sum;
    ++entries;
  };

  if (full_nest) {
    MultiIndex j(m, 0);
    for (std::size_t lin = 0; lin < c.size(); ++lin) {
      compute(j);
      for (std::size_t q = 0; q < m; ++q) {
        if (++j[q] < p) break;
        j[q] = 0;
      }
    }
  } else {
    for_each_hypertriangle(p, m, compute);
    detail::replicate_from_canonical(c);
  }
  ctx.add_flops(entries * (m + 1) * a.size());
  return c;
}

/// Scalar loops that keep T^(k) = T^(k+1) x_k x_{j_k} (order k, dims n) for
/// j_k <= j_{k+1} <= ... and finish each unique entry with a dot product.
/// Flops: sum_d 2 n^{m-d} C(p+d, d+1).
inline DenseTensor sttsm_scalar_temps(const DenseTensor& a,
                                      const DenseTensor& x,
                                      const ExecContext& ctx = {}) {
  const auto [m, n, p] = detail::check_sttsm_operands(a.dims(), x);
  DenseTensor c = DenseTensor::cube(m, p);
  const auto c_strides = dimensional_strides(c.dims());

  // temps[k] holds T^(k), n^k entries; temps[0] is the scalar result.
  std::vector<std::vector<double>> temps(m);
  std::vector<std::size_t> sizes(m + 1, 1);
  for (std::size_t k = 1; k <= m; ++k) sizes[k] = sizes[k - 1] * n;
  for (std::size_t k = 0; k < m; ++k) temps[k].resize(sizes[k]);

  MultiIndex j(m, 0);
  std::function<void(std::size_t)> level = [&](std::size_t k) {
    const double* src = k + 1 == m ? a.data().data() : temps[k + 1].data();
    detail::contract_last_mode(src, sizes[k], n, x, j[k], temps[k].data());
    ctx.add_flops(2ULL * sizes[k] * n);
    if (k == 0) {
      std::size_t off = 0;
      for (std::size_t q = 0; q < m; ++q) off += j[q] * c_strides[q];
      c[off] = temps[0][0];
      return;
    }
    for (std::size_t v = 0; v <= j[k]; ++v) {
      j[k - 1] = v;
      level(k - 1);
    }
  };
  for (std::size_t v = 0; v < p; ++v) {
    j[m - 1] = v;
    level(m - 1);
  }
  detail::replicate_from_canonical(c);
  return c;
}

/// C = A x_{m-1} X x_{m-2} X ... x_0 X through m dense mode products.
/// Symmetry of A is neither required nor used.
inline DenseTensor sttsm_dense_ttm(const DenseTensor& a, const DenseTensor& x,
                                   const ExecContext& ctx = {}) {
  const auto [m, n, p] = detail::check_sttsm_operands(a.dims(), x);
  (void)n;
  (void)p;
  DenseTensor c = mode_multiply(a, m - 1, x, ctx);
  for (std::size_t k = m - 1; k-- > 0;) c = mode_multiply(c, k, x, ctx);
  return c;
}

/// A temporary T^(level) of the blocked algorithm, reported once all of its
/// blocks are computed. outer_blocks holds the output block indices
/// (j̄_level, ..., j̄_{m-1}) it was formed for.
struct TemporaryView {
  std::size_t level = 0;
  MultiIndex outer_blocks;
  const PartialSymTensor& storage;
};

using TemporaryObserver = std::function<void(const TemporaryView&)>;

struct BlockedOptions {
  /// Store and compute only canonical blocks of each T^(k) (modes 0..k-1
  /// symmetric). When false every block of every temporary is computed.
  bool exploit_partial_symmetry = true;
  TemporaryObserver on_temporary;
};

namespace detail {

class BlockedSttsm {
 public:
  BlockedSttsm(const BcssTensor& a, const DenseTensor& x, std::size_t b_c,
               const ExecContext& ctx, const BlockedOptions& opts)
      : a_(a.storage()), x_(x), ctx_(ctx), opts_(opts) {
    const auto shape = check_sttsm_operands(a_.dense_dims(), x);
    m_ = shape.m;
    n_ = shape.n;
    p_ = shape.p;
    b_a_ = a.block_dim();
    b_c_ = b_c;
    if (b_c_ == 0 || p_ % b_c_ != 0) {
      throw BlockDivisibilityError("output block dimension " +
                                   std::to_string(b_c_) + " does not divide p = " +
                                   std::to_string(p_));
    }
    nbar_ = n_ / b_a_;
    pbar_ = p_ / b_c_;
    c_ = BcssTensor(m_, p_, b_c_);
    temps_.resize(m_);
    for (std::size_t k = 1; k < m_; ++k) {
      temps_[k] = opts_.exploit_partial_symmetry
                      ? PartialSymTensor(m_, k, n_, b_a_, b_c_)
                      : PartialSymTensor::full_grid(m_, k, n_, b_a_, b_c_);
    }
    // Largest stacked operand: n x (b_a^k b_c^{m-k-1}) over all levels.
    std::size_t stacked = 0;
    std::size_t product = 0;
    for (std::size_t k = 0; k < m_; ++k) {
      const std::size_t rest = ipow(b_a_, k) * ipow(b_c_, m_ - k - 1);
      stacked = std::max(stacked, n_ * rest);
      product = std::max(product, b_c_ * rest);
    }
    stacked_.resize(stacked);
    product_.resize(product);
    jbar_.assign(m_, 0);
  }

  BcssTensor run() {
    for (std::size_t v = 0; v < pbar_; ++v) {
      jbar_[m_ - 1] = v;
      level(m_ - 1);
    }
    return std::move(c_);
  }

 private:
  static std::size_t ipow(std::size_t b, std::size_t e) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < e; ++i) r *= b;
    return r;
  }

  void level(std::size_t k) {
    if (k == 0) {
      const std::size_t slot = c_.slot_of(jbar_);
      compute_block(temps_[1], 0, {}, c_.block(slot));
      return;
    }
    const PartialSymTensor& src = k + 1 == m_ ? a_ : temps_[k + 1];
    PartialSymTensor& dst = temps_[k];
    for (std::size_t slot = 0; slot < dst.num_blocks(); ++slot) {
      compute_block(src, k, dst.block_key(slot), dst.block(slot));
    }
    if (opts_.on_temporary) {
      MultiIndex outer(jbar_.begin() + static_cast<std::ptrdiff_t>(k),
                       jbar_.end());
      opts_.on_temporary(TemporaryView{k, std::move(outer), dst});
    }
    for (std::size_t v = 0; v <= jbar_[k]; ++v) {
      jbar_[k - 1] = v;
      level(k - 1);
    }
  }

  /// One block of T^(k) = T^(k+1) x_k X_{j̄_k,:}. The n̄ blocks of T^(k+1)
  /// along mode k are permuted (mode k first) into one n x R operand, so a
  /// single GEMM with the b_c x n row panel of X produces the block.
  void compute_block(const PartialSymTensor& src, std::size_t k,
                     std::span<const std::size_t> key, std::span<double> out) {
    const Permutation front = Permutation::mode_to_front(m_, k);
    const Dims& in_dims = src.block_dims();
    const std::size_t in_size = src.block_size();
    const std::size_t rest = in_size / b_a_;

    Dims perm_dims = detail::permuted_dims(in_dims, front);
    std::vector<std::size_t> stacked_strides(m_);
    stacked_strides[0] = 1;
    std::size_t acc = n_;
    for (std::size_t q = 1; q < m_; ++q) {
      stacked_strides[q] = acc;
      acc *= perm_dims[q];
    }

    MultiIndex sidx(key.begin(), key.end());
    sidx.push_back(0);
    for (std::size_t l = 0; l < nbar_; ++l) {
      sidx[k] = l;
      const MetaEntry& e = src.meta(sidx);
      const Permutation composite = src.applied_permutation(sidx).then(front);
      detail::permute_into(src.block(e.slot).data(), in_dims, composite,
                           stacked_.data() + l * b_a_, stacked_strides);
      ctx_.add_memops(in_size);
    }

    const ConstMatrixView panel{x_.data().data() + jbar_[k] * b_c_, b_c_, n_,
                                p_};
    detail::gemm(ctx_, panel, {stacked_.data(), n_, rest, n_},
                 {product_.data(), b_c_, rest, b_c_});

    perm_dims[0] = b_c_;
    Dims out_dims = in_dims;
    out_dims[k] = b_c_;
    const auto out_strides = dimensional_strides(out_dims);
    detail::permute_into(product_.data(), perm_dims, front.inverse(),
                         out.data(), out_strides);
    ctx_.add_memops(out.size());
  }

  const PartialSymTensor& a_;
  const DenseTensor& x_;
  const ExecContext& ctx_;
  const BlockedOptions& opts_;
  std::size_t m_ = 0, n_ = 0, p_ = 0, b_a_ = 0, b_c_ = 0, nbar_ = 0, pbar_ = 0;
  BcssTensor c_;
  std::vector<PartialSymTensor> temps_;
  std::vector<double> stacked_;
  std::vector<double> product_;
  MultiIndex jbar_;
};

}  // namespace detail

/// Algorithm-by-blocks over BCSS operands; the result is BCSS with block
/// dimension b_c. Every canonical output block is produced exactly once.
inline BcssTensor sttsm_bcss(const BcssTensor& a, const DenseTensor& x,
                             std::size_t b_c, const ExecContext& ctx = {},
                             const BlockedOptions& opts = {}) {
  return detail::BlockedSttsm(a, x, b_c, ctx, opts).run();
}

/// Replaces each entry by the mean over all m! permutations of its index.
/// The mean is formed once per sorted index, so the output is exactly
/// symmetric.
inline DenseTensor symmetrize(const DenseTensor& t) {
  const std::size_t m = t.order();
  for (std::size_t q = 1; q < m; ++q) {
    if (t.dim(q) != t.dim(0)) {
      throw ShapeError("symmetrize needs equal dims, got " + to_string(t.dims()));
    }
  }
  DenseTensor out(t.dims());
  const auto strides = dimensional_strides(t.dims());
  const double count = static_cast<double>(factorial(m));
  std::vector<std::size_t> pos(m);
  for_each_hypertriangle(t.dim(0), m, [&](const MultiIndex& idx) {
    std::iota(pos.begin(), pos.end(), 0);
    double sum = 0.0;
    do {
      std::size_t off = 0;
      for (std::size_t q = 0; q < m; ++q) off += idx[pos[q]] * strides[q];
      sum += t[off];
    } while (std::next_permutation(pos.begin(), pos.end()));
    std::size_t off = 0;
    for (std::size_t q = 0; q < m; ++q) off += idx[q] * strides[q];
    out[off] = sum / count;
  });
  detail::replicate_from_canonical(out);
  return out;
}

}  // namespace symtensor
