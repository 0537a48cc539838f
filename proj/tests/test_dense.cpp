#include <gtest/gtest.h>

#include <random>
#include <set>

#include "test_util.hpp"

using namespace symtensor;
using symtensor::testing::all_indices;
using symtensor::testing::random_dense;
using symtensor::testing::random_permutation;

TEST(LinearOffset, Examples) {
  EXPECT_EQ(linear_offset(Dims{3, 4}, MultiIndex{0, 0}), 0u);
  EXPECT_EQ(linear_offset(Dims{3, 4}, MultiIndex{2, 3}), 11u);
  EXPECT_EQ(linear_offset(Dims{2, 3, 4}, MultiIndex{1, 2, 3}), 23u);
}

TEST(LinearOffset, BijectiveOverBox) {
  const Dims dims{2, 3, 4};
  std::set<std::size_t> seen;
  for (std::size_t i0 = 0; i0 < 2; ++i0)
    for (std::size_t i1 = 0; i1 < 3; ++i1)
      for (std::size_t i2 = 0; i2 < 4; ++i2) {
        const std::size_t off = linear_offset(dims, MultiIndex{i0, i1, i2});
        EXPECT_EQ(off, i0 + 2 * i1 + 6 * i2);
        seen.insert(off);
      }
  EXPECT_EQ(seen.size(), 24u);
  EXPECT_EQ(*seen.rbegin(), 23u);
}

TEST(LinearOffset, Errors) {
  EXPECT_THROW(linear_offset(Dims{3, 4}, MultiIndex{3, 0}), RangeError);
  EXPECT_THROW(linear_offset(Dims{3, 4}, MultiIndex{0}), ShapeError);
}

TEST(DenseTensor, ConstructionChecks) {
  EXPECT_THROW(DenseTensor(Dims{}), ShapeError);
  EXPECT_THROW(DenseTensor(Dims{2, 2}, std::vector<double>(3)), ShapeError);
  const DenseTensor t(Dims{2, 3});
  EXPECT_EQ(t.size(), 6u);
  for (double v : t.data()) EXPECT_EQ(v, 0.0);
}

TEST(Permutation, RejectsNonBijection) {
  EXPECT_THROW(Permutation({0, 0}), ParameterError);
  EXPECT_THROW(Permutation({0, 2}), ParameterError);
}

TEST(Permutation, InverseAndComposition) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + trial % 6;
    const Permutation p = random_permutation(m, rng);
    const Permutation q = random_permutation(m, rng);
    EXPECT_TRUE(p.then(p.inverse()).is_identity());
    EXPECT_TRUE(p.inverse().then(p).is_identity());
    MultiIndex idx(m);
    for (std::size_t k = 0; k < m; ++k) idx[k] = 10 * k + 1;
    EXPECT_EQ(p.then(q).apply(idx), q.apply(p.apply(idx)));
  }
}

TEST(Permute, IdentityIsBitwise) {
  const DenseTensor t = random_dense({2, 3, 4}, 1);
  EXPECT_TRUE(bitwise_equal(permute(t, Permutation::identity(3)), t));
  EXPECT_TRUE(bitwise_equal(ipermute(t, Permutation::identity(3)), t));
}

TEST(Permute, MatrixTranspose) {
  const DenseTensor t = random_dense({2, 3}, 2);
  const DenseTensor tt = permute(t, Permutation({1, 0}));
  ASSERT_EQ(tt.dims(), (Dims{3, 2}));
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(tt(c, r), t(r, c));
}

TEST(Permute, ElementwiseRemapOracle) {
  const DenseTensor t = random_dense({2, 3, 4}, 3);
  const Permutation p({2, 0, 1});
  const DenseTensor out = permute(t, p);
  ASSERT_EQ(out.dims(), (Dims{4, 2, 3}));
  for (std::size_t i0 = 0; i0 < 2; ++i0)
    for (std::size_t i1 = 0; i1 < 3; ++i1)
      for (std::size_t i2 = 0; i2 < 4; ++i2) {
        const MultiIndex i{i0, i1, i2};
        const MultiIndex ip{i2, i0, i1};
        EXPECT_EQ(out.at(ip), t.at(i));
      }
}

TEST(Permute, RoundTripBitwiseUpToOrderSix) {
  std::mt19937_64 rng(11);
  for (std::size_t m = 1; m <= 6; ++m) {
    for (int trial = 0; trial < 10; ++trial) {
      Dims dims(m);
      for (auto& d : dims) d = 1 + rng() % 4;
      const DenseTensor t = random_dense(dims, rng());
      const Permutation p = random_permutation(m, rng);
      EXPECT_TRUE(bitwise_equal(ipermute(permute(t, p), p), t));
      EXPECT_TRUE(bitwise_equal(permute(ipermute(t, p), p), t));
      EXPECT_TRUE(bitwise_equal(ipermute(t, p), permute(t, p.inverse())));
    }
  }
}

TEST(Permute, CubeRoundTrip) {
  const DenseTensor t = random_dense({3, 3, 3}, 5);
  const Permutation p({1, 2, 0});
  EXPECT_TRUE(bitwise_equal(ipermute(permute(t, p), p), t));
}

TEST(Permute, LengthMismatch) {
  const DenseTensor t = random_dense({2, 3}, 1);
  EXPECT_THROW(permute(t, Permutation::identity(3)), ShapeError);
  EXPECT_THROW(ipermute(t, Permutation::identity(1)), ShapeError);
}

TEST(GroupModes, ShapesAndZeroCopy) {
  DenseTensor t = random_dense({2, 3, 4}, 7);
  const std::vector<double> before(t.data().begin(), t.data().end());
  const ConstMatrixView v1 = group_modes(std::as_const(t), 1);
  EXPECT_EQ(v1.rows, 2u);
  EXPECT_EQ(v1.cols, 12u);
  const ConstMatrixView v2 = group_modes(std::as_const(t), 2);
  EXPECT_EQ(v2.rows, 6u);
  EXPECT_EQ(v2.cols, 4u);
  EXPECT_EQ(v2.data, t.data().data());
  for (const auto& i : all_indices(t.dims())) {
    EXPECT_EQ(v2.data + (i[0] + 2 * i[1]) + i[2] * v2.ld, &t.data()[linear_offset(t.dims(), i)]);
  }
  const MatrixView mv = group_modes(t, 1);
  EXPECT_EQ(mv.data, t.data().data());
  EXPECT_TRUE(std::equal(before.begin(), before.end(), t.data().begin()));
}

TEST(GroupModes, MatrixIsItself) {
  const DenseTensor t = random_dense({3, 5}, 8);
  const ConstMatrixView v = group_modes(t, 1);
  const ConstMatrixView w = as_matrix(t);
  EXPECT_EQ(v.data, w.data);
  EXPECT_EQ(v.rows, w.rows);
  EXPECT_EQ(v.cols, w.cols);
}

TEST(GroupModes, SplitOutOfRange) {
  const DenseTensor t = random_dense({2, 3, 4}, 1);
  EXPECT_THROW(group_modes(t, 0), ShapeError);
  EXPECT_THROW(group_modes(t, 3), ShapeError);
}

TEST(MatmulRef, Examples) {
  const DenseTensor one(Dims{1, 1}, {2.0});
  const DenseTensor three(Dims{1, 1}, {3.0});
  EXPECT_EQ(matmul_ref(one, three)[0], 6.0);

  const DenseTensor a = random_dense({3, 3}, 4);
  DenseTensor eye(Dims{3, 3});
  for (std::size_t i = 0; i < 3; ++i) eye(i, i) = 1.0;
  EXPECT_TRUE(bitwise_equal(matmul_ref(eye, a), a));
}

TEST(MatmulRef, DotProductOracle) {
  const DenseTensor a = random_dense({3, 4}, 9);
  const DenseTensor b = random_dense({4, 2}, 10);
  const DenseTensor c = matmul_ref(a, b);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < 4; ++k) dot += a(i, k) * b(k, j);
      EXPECT_NEAR(c(i, j), dot, 1e-15);
    }
  EXPECT_THROW(matmul_ref(a, a), ShapeError);
}

namespace {

struct CountingKernel {
  static inline int calls = 0;
  static void gemm(ConstMatrixView a, ConstMatrixView b, MatrixView c) {
    ++calls;
    reference_gemm(a, b, c);
  }
};

/// Contraction of mode k with b, straight from the definition.
DenseTensor naive_mode_multiply(const DenseTensor& t, std::size_t k,
                                const DenseTensor& b) {
  Dims out_dims = t.dims();
  out_dims[k] = b.dim(0);
  DenseTensor out(out_dims);
  for (const auto& j : all_indices(out_dims)) {
    double sum = 0.0;
    MultiIndex i = j;
    for (std::size_t l = 0; l < t.dim(k); ++l) {
      i[k] = l;
      sum += t.at(i) * b(j[k], l);
    }
    out.at(j) = sum;
  }
  return out;
}

}  // namespace

TEST(GemmSeam, KernelIsPluggable) {
  CountingKernel::calls = 0;
  const DenseTensor t = random_dense({3, 4, 2}, 12);
  const DenseTensor b = random_dense({5, 4}, 13);
  const ExecContext ctx{nullptr, &CountingKernel::gemm};
  const DenseTensor out = mode_multiply(t, 1, b, ctx);
  EXPECT_EQ(CountingKernel::calls, 1);
  EXPECT_TRUE(bitwise_equal(out, mode_multiply(t, 1, b)));
}

TEST(ModeMultiply, IdentityMatrixIsIdentityMap) {
  const DenseTensor t = random_dense({3, 4, 2}, 14);
  for (std::size_t k = 0; k < 3; ++k) {
    DenseTensor eye(Dims{t.dim(k), t.dim(k)});
    for (std::size_t i = 0; i < t.dim(k); ++i) eye(i, i) = 1.0;
    EXPECT_TRUE(bitwise_equal(mode_multiply(t, k, eye), t));
  }
}

TEST(ModeMultiply, MatrixCaseIsXAXt) {
  const DenseTensor a = random_dense({4, 4}, 15);
  const DenseTensor x = random_dense({3, 4}, 16);
  const DenseTensor c = mode_multiply(mode_multiply(a, 1, x), 0, x);
  const DenseTensor ref = matmul_ref(matmul_ref(x, a), permute(x, Permutation({1, 0})));
  EXPECT_LE(max_relative_error(c, ref), 1e-13);
}

TEST(ModeMultiply, SmallCubeTripleLoop) {
  const DenseTensor t = random_dense({2, 2, 2}, 17);
  const DenseTensor b = random_dense({3, 2}, 18);
  const DenseTensor out = mode_multiply(t, 2, b);
  ASSERT_EQ(out.dims(), (Dims{2, 2, 3}));
  for (std::size_t i0 = 0; i0 < 2; ++i0)
    for (std::size_t i1 = 0; i1 < 2; ++i1)
      for (std::size_t j = 0; j < 3; ++j) {
        double s = 0.0;
        for (std::size_t l = 0; l < 2; ++l) s += t.at(MultiIndex{i0, i1, l}) * b(j, l);
        EXPECT_LE(std::abs(out.at(MultiIndex{i0, i1, j}) - s), 1e-13 * std::abs(s) + 1e-300);
      }
}

TEST(ModeMultiply, RandomAgreesWithNestedLoops) {
  std::mt19937_64 rng(19);
  for (std::size_t m = 1; m <= 5; ++m) {
    for (int trial = 0; trial < 6; ++trial) {
      Dims dims(m);
      for (auto& d : dims) d = 1 + rng() % 6;
      if (element_count(dims) > 4000) continue;
      const DenseTensor t = random_dense(dims, rng());
      const std::size_t k = rng() % m;
      const DenseTensor b = random_dense({1 + rng() % 5, dims[k]}, rng());
      EXPECT_LE(max_relative_error(mode_multiply(t, k, b), naive_mode_multiply(t, k, b)),
                1e-13);
    }
  }
}

TEST(ModeMultiply, CountsFlopsAndMemops) {
  const DenseTensor t = random_dense({3, 4, 2}, 20);
  const DenseTensor b = random_dense({5, 4}, 21);
  OpCounter ops;
  const DenseTensor out = mode_multiply(t, 1, b, {&ops});
  EXPECT_EQ(ops.flops, 2u * 5 * t.size());
  // permute in, GEMM store, ipermute out
  EXPECT_EQ(ops.memops, t.size() + 2 * out.size());
}

TEST(ModeMultiply, Errors) {
  const DenseTensor t = random_dense({3, 4}, 22);
  EXPECT_THROW(mode_multiply(t, 2, random_dense({2, 3}, 1)), ModeError);
  EXPECT_THROW(mode_multiply(t, 0, random_dense({2, 4}, 1)), ShapeError);
}

TEST(MaxRelativeError, NormwiseAgainstReference) {
  const DenseTensor ref(Dims{3}, {1.0, -4.0, 2.0});
  const DenseTensor a(Dims{3}, {1.0, -4.0, 2.5});
  EXPECT_DOUBLE_EQ(max_relative_error(a, ref), 0.5 / 4.0);
  EXPECT_EQ(max_relative_error(ref, ref), 0.0);
}
