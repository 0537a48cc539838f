#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "symtensor/checked.hpp"
#include "symtensor/errors.hpp"

namespace symtensor {

using MultiIndex = std::vector<std::size_t>;
using Dims = std::vector<std::size_t>;

inline std::string to_string(std::span<const std::size_t> idx) {
  std::string s = "(";
  for (std::size_t q = 0; q < idx.size(); ++q) {
    if (q) s += ",";
    s += std::to_string(idx[q]);
  }
  return s + ")";
}

/// Number of elements in a box with the given extents.
inline std::size_t element_count(std::span<const std::size_t> dims) {
  std::uint64_t n = 1;
  for (std::size_t d : dims) n = checked_mul(n, d);
  return static_cast<std::size_t>(n);
}

/// Strides of dimensional order: mode 0 is contiguous.
inline std::vector<std::size_t> dimensional_strides(
    std::span<const std::size_t> dims) {
  std::vector<std::size_t> s(dims.size());
  std::size_t acc = 1;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    s[k] = acc;
    acc *= dims[k];
  }
  return s;
}

inline std::size_t linear_offset(std::span<const std::size_t> dims,
                                 std::span<const std::size_t> idx) {
  if (idx.size() != dims.size()) {
    throw ShapeError("index " + to_string(idx) + " has " +
                     std::to_string(idx.size()) + " entries, expected " +
                     std::to_string(dims.size()));
  }
  std::size_t off = 0;
  std::size_t stride = 1;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (idx[k] >= dims[k]) {
      throw RangeError("index " + to_string(idx) + " out of range in mode " +
                       std::to_string(k));
    }
    off += idx[k] * stride;
    stride *= dims[k];
  }
  return off;
}

/// A bijection on mode positions {0, ..., m-1}.
///
/// Applied to an index i it yields i' with i'_q = i_{mapping[q]}; applied to
/// a tensor (see permute) the result has dims I_{mapping[q]}.
class Permutation {
 public:
  Permutation() = default;

  explicit Permutation(std::vector<std::size_t> mapping)
      : mapping_(std::move(mapping)) {
    std::vector<bool> seen(mapping_.size(), false);
    for (std::size_t v : mapping_) {
      if (v >= mapping_.size() || seen[v]) {
        throw ParameterError("not a permutation: " + to_string(mapping_));
      }
      seen[v] = true;
    }
  }

  static Permutation identity(std::size_t m) {
    std::vector<std::size_t> p(m);
    for (std::size_t q = 0; q < m; ++q) p[q] = q;
    return Permutation(std::move(p));
  }

  /// {k, 0, ..., k-1, k+1, ..., m-1}: brings mode k to the front.
  static Permutation mode_to_front(std::size_t m, std::size_t k) {
    std::vector<std::size_t> p;
    p.reserve(m);
    p.push_back(k);
    for (std::size_t q = 0; q < m; ++q) {
      if (q != k) p.push_back(q);
    }
    return Permutation(std::move(p));
  }

  std::size_t size() const noexcept { return mapping_.size(); }
  std::size_t operator[](std::size_t q) const { return mapping_[q]; }
  const std::vector<std::size_t>& mapping() const noexcept { return mapping_; }

  Permutation inverse() const {
    std::vector<std::size_t> inv(mapping_.size());
    for (std::size_t q = 0; q < mapping_.size(); ++q) inv[mapping_[q]] = q;
    return Permutation(std::move(inv));
  }

  bool is_identity() const noexcept {
    for (std::size_t q = 0; q < mapping_.size(); ++q) {
      if (mapping_[q] != q) return false;
    }
    return true;
  }

  MultiIndex apply(std::span<const std::size_t> idx) const {
    MultiIndex out(mapping_.size());
    for (std::size_t q = 0; q < mapping_.size(); ++q) out[q] = idx[mapping_[q]];
    return out;
  }

  /// The single permutation equal to applying *this and then `next`.
  Permutation then(const Permutation& next) const {
    std::vector<std::size_t> c(next.size());
    for (std::size_t q = 0; q < next.size(); ++q) c[q] = mapping_[next[q]];
    return Permutation(std::move(c));
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> mapping_;
};

/// Order-m array of doubles stored in dimensional order (i_0 fastest).
class DenseTensor {
 public:
  DenseTensor() = default;

  explicit DenseTensor(Dims dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw ShapeError("tensor order must be positive");
    data_.assign(element_count(dims_), 0.0);
  }

  DenseTensor(Dims dims, std::vector<double> data)
      : dims_(std::move(dims)), data_(std::move(data)) {
    if (dims_.empty()) throw ShapeError("tensor order must be positive");
    if (data_.size() != element_count(dims_)) {
      throw ShapeError("data length " + std::to_string(data_.size()) +
                       " does not match dims " + to_string(dims_));
    }
  }

  static DenseTensor matrix(std::size_t rows, std::size_t cols) {
    return DenseTensor(Dims{rows, cols});
  }

  /// All m dims equal to n.
  static DenseTensor cube(std::size_t m, std::size_t n) {
    return DenseTensor(Dims(m, n));
  }

  std::size_t order() const noexcept { return dims_.size(); }
  const Dims& dims() const noexcept { return dims_; }
  std::size_t dim(std::size_t k) const { return dims_.at(k); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  double operator[](std::size_t off) const { return data_[off]; }
  double& operator[](std::size_t off) { return data_[off]; }

  double at(std::span<const std::size_t> idx) const {
    return data_[linear_offset(dims_, idx)];
  }
  double& at(std::span<const std::size_t> idx) {
    return data_[linear_offset(dims_, idx)];
  }

  /// Element (r, c) of an order-2 tensor.
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r + c * dims_[0]];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return data_[r + c * dims_[0]];
  }

 private:
  Dims dims_;
  std::vector<double> data_;
};

/// Same dims and identical bit patterns.
inline bool bitwise_equal(const DenseTensor& a, const DenseTensor& b) {
  return a.dims() == b.dims() &&
         std::memcmp(a.data().data(), b.data().data(),
                     a.size() * sizeof(double)) == 0;
}

/// max |a - ref| / max |ref|; the reference's magnitude sets the scale so
/// entries near zero from cancellation do not dominate.
inline double max_relative_error(std::span<const double> a,
                                 std::span<const double> ref) {
  if (a.size() != ref.size()) throw ShapeError("size mismatch in comparison");
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - ref[i]));
    scale = std::max(scale, std::abs(ref[i]));
  }
  if (scale == 0.0) return diff;
  return diff / scale;
}

inline double max_relative_error(const DenseTensor& a, const DenseTensor& ref) {
  if (a.dims() != ref.dims()) throw ShapeError("dims mismatch in comparison");
  return max_relative_error(a.data(), ref.data());
}

namespace detail {

/// Visits every index of the box `dims` in dimensional order, passing the
/// running linear offset and the offset under `strides`.
template <class Fn>
void for_each_strided(std::span<const std::size_t> dims,
                      std::span<const std::size_t> strides, Fn&& fn) {
  const std::size_t m = dims.size();
  const std::size_t total = element_count(dims);
  if (total == 0) return;
  const std::size_t n0 = dims[0];
  const std::size_t s0 = strides[0];
  std::vector<std::size_t> idx(m, 0);
  std::size_t strided = 0;
  for (std::size_t lin = 0; lin < total; lin += n0) {
    std::size_t off = strided;
    for (std::size_t i = 0; i < n0; ++i, off += s0) fn(lin + i, off);
    for (std::size_t k = 1; k < m; ++k) {
      ++idx[k];
      strided += strides[k];
      if (idx[k] < dims[k]) break;
      strided -= strides[k] * dims[k];
      idx[k] = 0;
    }
  }
}

/// Scatters `src` (dims `src_dims`) into `dst` so that the destination, read
/// with `dst_strides`, holds permute(src, p). Returns the elements written.
inline std::size_t permute_into(const double* src,
                                std::span<const std::size_t> src_dims,
                                const Permutation& p, double* dst,
                                std::span<const std::size_t> dst_strides) {
  const std::size_t m = src_dims.size();
  std::vector<std::size_t> per_src(m);
  for (std::size_t q = 0; q < m; ++q) per_src[p[q]] = dst_strides[q];
  for_each_strided(src_dims, per_src,
                   [&](std::size_t lin, std::size_t off) { dst[off] = src[lin]; });
  return element_count(src_dims);
}

inline Dims permuted_dims(std::span<const std::size_t> dims,
                          const Permutation& p) {
  Dims out(p.size());
  for (std::size_t q = 0; q < p.size(); ++q) out[q] = dims[p[q]];
  return out;
}

}  // namespace detail

/// Result dims are I_{p_q}; element at i' (i'_q = i_{p_q}) equals t(i).
inline DenseTensor permute(const DenseTensor& t, const Permutation& p) {
  if (p.size() != t.order()) {
    throw ShapeError("permutation of length " + std::to_string(p.size()) +
                     " applied to order-" + std::to_string(t.order()) +
                     " tensor");
  }
  DenseTensor out(detail::permuted_dims(t.dims(), p));
  const auto strides = dimensional_strides(out.dims());
  detail::permute_into(t.data().data(), t.dims(), p, out.data().data(),
                       strides);
  return out;
}

/// Inverse of permute: ipermute(permute(t, p), p) == t.
inline DenseTensor ipermute(const DenseTensor& t, const Permutation& p) {
  const std::size_t m = t.order();
  if (p.size() != m) {
    throw ShapeError("permutation of length " + std::to_string(p.size()) +
                     " applied to order-" + std::to_string(m) + " tensor");
  }
  Dims out_dims(m);
  for (std::size_t q = 0; q < m; ++q) out_dims[p[q]] = t.dim(q);
  DenseTensor out(std::move(out_dims));
  // Gather: out(i) = t(i') with i'_q = i_{p_q}.
  const auto src_strides = dimensional_strides(t.dims());
  std::vector<std::size_t> per_out(m);
  for (std::size_t q = 0; q < m; ++q) per_out[p[q]] = src_strides[q];
  const double* src = t.data().data();
  double* dst = out.data().data();
  detail::for_each_strided(
      out.dims(), per_out,
      [&](std::size_t lin, std::size_t off) { dst[lin] = src[off]; });
  return out;
}

// ---------------------------------------------------------------------------
// Matrix views and the GEMM seam.

/// Column-major read-only matrix view with leading dimension `ld`.
struct ConstMatrixView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t ld = 0;

  double operator()(std::size_t r, std::size_t c) const {
    return data[r + c * ld];
  }
};

struct MatrixView {
  double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t ld = 0;

  double& operator()(std::size_t r, std::size_t c) const {
    return data[r + c * ld];
  }
  operator ConstMatrixView() const { return {data, rows, cols, ld}; }
};

inline ConstMatrixView as_matrix(const DenseTensor& m) {
  if (m.order() != 2) throw ShapeError("expected an order-2 tensor");
  return {m.data().data(), m.dim(0), m.dim(1), m.dim(0)};
}

/// Views t as a matrix whose rows group modes [0, r) and columns [r, m).
/// No data moves: (row, col) addresses offset row + col * rows.
inline ConstMatrixView group_modes(const DenseTensor& t, std::size_t r) {
  if (r == 0 || r >= t.order()) {
    throw ShapeError("group split " + std::to_string(r) +
                     " out of range for order " + std::to_string(t.order()));
  }
  std::size_t rows = 1;
  for (std::size_t k = 0; k < r; ++k) rows *= t.dim(k);
  return {t.data().data(), rows, t.size() / rows, rows};
}

inline MatrixView group_modes(DenseTensor& t, std::size_t r) {
  const ConstMatrixView v = group_modes(std::as_const(t), r);
  return {t.data().data(), v.rows, v.cols, v.ld};
}

/// c := a * b (overwrites c).
using GemmKernel = void (*)(ConstMatrixView a, ConstMatrixView b,
                            MatrixView c);

/// Triple loop; for each entry of c the inner index runs in ascending order.
inline void reference_gemm(ConstMatrixView a, ConstMatrixView b, MatrixView c) {
  const std::size_t p = a.rows;
  const std::size_t q = a.cols;
  for (std::size_t j = 0; j < c.cols; ++j) {
    double* __restrict cj = c.data + j * c.ld;
    for (std::size_t i = 0; i < p; ++i) cj[i] = 0.0;
    const double* bj = b.data + j * b.ld;
    for (std::size_t k = 0; k < q; ++k) {
      const double bkj = bj[k];
      const double* __restrict ak = a.data + k * a.ld;
      for (std::size_t i = 0; i < p; ++i) cj[i] += ak[i] * bkj;
    }
  }
}

/// flops: 2 per multiply-add. memops: elements written by permute/copy steps
/// and by GEMM result stores.
struct OpCounter {
  std::uint64_t flops = 0;
  std::uint64_t memops = 0;

  void reset() noexcept { *this = {}; }
  friend bool operator==(const OpCounter&, const OpCounter&) = default;
};

/// Per-invocation execution settings: where to count and which GEMM to use.
struct ExecContext {
  OpCounter* counter = nullptr;
  GemmKernel gemm = &reference_gemm;

  void add_flops(std::uint64_t f) const {
    if (counter) counter->flops += f;
  }
  void add_memops(std::uint64_t m) const {
    if (counter) counter->memops += m;
  }
};

namespace detail {

inline void gemm(const ExecContext& ctx, ConstMatrixView a, ConstMatrixView b,
                 MatrixView c) {
  if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols) {
    throw ShapeError("gemm shape mismatch: (" + std::to_string(a.rows) + "x" +
                     std::to_string(a.cols) + ") * (" + std::to_string(b.rows) +
                     "x" + std::to_string(b.cols) + ") -> (" +
                     std::to_string(c.rows) + "x" + std::to_string(c.cols) +
                     ")");
  }
  ctx.gemm(a, b, c);
  ctx.add_flops(2ULL * a.rows * a.cols * b.cols);
  ctx.add_memops(static_cast<std::uint64_t>(c.rows) * c.cols);
}

}  // namespace detail

inline DenseTensor matmul_ref(const DenseTensor& a, const DenseTensor& b,
                              const ExecContext& ctx = {}) {
  const ConstMatrixView av = as_matrix(a);
  const ConstMatrixView bv = as_matrix(b);
  if (av.cols != bv.rows) {
    throw ShapeError("inner dimensions disagree: " + std::to_string(av.cols) +
                     " vs " + std::to_string(bv.rows));
  }
  DenseTensor c = DenseTensor::matrix(av.rows, bv.cols);
  detail::gemm(ctx, av, bv, {c.data().data(), av.rows, bv.cols, av.rows});
  return c;
}

/// t x_k b: replaces dimension I_k by J (b is J x I_k).
///
/// Cast to GEMM: permute mode k to the front, view as an I_k x (rest) matrix,
/// multiply by b, view the J x (rest) product as a tensor, and ipermute back.
inline DenseTensor mode_multiply(const DenseTensor& t, std::size_t k,
                                 const DenseTensor& b,
                                 const ExecContext& ctx = {}) {
  const std::size_t m = t.order();
  if (k >= m) {
    throw ModeError("mode " + std::to_string(k) + " of order-" +
                    std::to_string(m) + " tensor");
  }
  const ConstMatrixView bv = as_matrix(b);
  if (bv.cols != t.dim(k)) {
    throw ShapeError("matrix has " + std::to_string(bv.cols) +
                     " columns but mode " + std::to_string(k) + " has dim " +
                     std::to_string(t.dim(k)));
  }
  const Permutation front = Permutation::mode_to_front(m, k);
  if (m == 1) {
    DenseTensor out(Dims{bv.rows});
    detail::gemm(ctx, bv, {t.data().data(), t.size(), 1, t.size()},
                 {out.data().data(), bv.rows, 1, bv.rows});
    return out;
  }

  const DenseTensor pa = permute(t, front);
  ctx.add_memops(pa.size());
  const ConstMatrixView av = group_modes(pa, 1);

  Dims pc_dims = pa.dims();
  pc_dims[0] = bv.rows;
  DenseTensor pc(std::move(pc_dims));
  detail::gemm(ctx, bv, av, group_modes(pc, 1));

  DenseTensor out = ipermute(pc, front);
  ctx.add_memops(out.size());
  return out;
}

}  // namespace symtensor
