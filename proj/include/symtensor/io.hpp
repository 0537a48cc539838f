#pragma once

// Binary tensor files, all integers and doubles little-endian.
//
//   STNS: "STNS" u16 version(1) u16 order, order x u64 dims, doubles in
//         dimensional order.
//   BCSS: "BCSS" u16 version(1) u16 order u64 n u64 b, then the canonical
//         blocks in hypertriangle order, each in dimensional order.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "symtensor/bcss.hpp"
#include "symtensor/checked.hpp"
#include "symtensor/dense.hpp"
#include "symtensor/errors.hpp"

namespace symtensor {

namespace detail {

inline constexpr std::uint16_t kFormatVersion = 1;

template <class U>
void write_le(std::ostream& os, U v) {
  std::array<char, sizeof(U)> buf;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  }
  os.write(buf.data(), buf.size());
}

template <class U>
U read_le(std::istream& is, const char* what) {
  std::array<unsigned char, sizeof(U)> buf;
  if (!is.read(reinterpret_cast<char*>(buf.data()), buf.size())) {
    throw FormatError(std::string("truncated input reading ") + what);
  }
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

inline void write_doubles(std::ostream& os, std::span<const double> xs) {
  for (double x : xs) write_le(os, std::bit_cast<std::uint64_t>(x));
}

inline void read_doubles(std::istream& is, std::span<double> xs) {
  for (double& x : xs) x = std::bit_cast<double>(read_le<std::uint64_t>(is, "data"));
}

inline void expect_magic(std::istream& is, const char (&magic)[5]) {
  char got[4];
  if (!is.read(got, 4)) throw FormatError("truncated input reading magic");
  if (std::memcmp(got, magic, 4) != 0) {
    throw FormatError(std::string("bad magic, expected ") + magic);
  }
  const auto version = read_le<std::uint16_t>(is, "version");
  if (version != kFormatVersion) {
    throw FormatError("unsupported format version " + std::to_string(version));
  }
}

inline void expect_end(std::istream& is) {
  if (is.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after tensor data");
  }
}

}  // namespace detail

inline void write_tensor(std::ostream& os, const DenseTensor& t) {
  os.write("STNS", 4);
  detail::write_le(os, detail::kFormatVersion);
  detail::write_le(os, static_cast<std::uint16_t>(t.order()));
  for (std::size_t d : t.dims()) detail::write_le(os, static_cast<std::uint64_t>(d));
  detail::write_doubles(os, t.data());
  if (!os) throw FormatError("write failed");
}

inline DenseTensor read_tensor(std::istream& is) {
  detail::expect_magic(is, "STNS");
  const auto order = detail::read_le<std::uint16_t>(is, "order");
  if (order == 0) throw FormatError("order 0 tensor");
  Dims dims(order);
  std::uint64_t total = 1;
  for (auto& d : dims) {
    const auto v = detail::read_le<std::uint64_t>(is, "dims");
    if (v == 0) throw FormatError("zero dimension");
    if (__builtin_mul_overflow(total, v, &total) || total > (std::uint64_t{1} << 40)) {
      throw FormatError("dimensions too large");
    }
    d = static_cast<std::size_t>(v);
  }
  DenseTensor t(std::move(dims));
  detail::read_doubles(is, t.data());
  detail::expect_end(is);
  return t;
}

inline void write_bcss(std::ostream& os, const BcssTensor& a) {
  os.write("BCSS", 4);
  detail::write_le(os, detail::kFormatVersion);
  detail::write_le(os, static_cast<std::uint16_t>(a.order()));
  detail::write_le(os, static_cast<std::uint64_t>(a.dim()));
  detail::write_le(os, static_cast<std::uint64_t>(a.block_dim()));
  detail::write_doubles(os, a.storage().payload());
  if (!os) throw FormatError("write failed");
}

inline BcssTensor read_bcss(std::istream& is) {
  detail::expect_magic(is, "BCSS");
  const auto order = detail::read_le<std::uint16_t>(is, "order");
  const auto n = detail::read_le<std::uint64_t>(is, "n");
  const auto b = detail::read_le<std::uint64_t>(is, "b");
  if (order == 0 || order > kMaxOrder || n == 0 || b == 0 || n % b != 0 ||
      n > (std::uint64_t{1} << 32)) {
    throw FormatError("invalid BCSS header: order " + std::to_string(order) +
                      ", n " + std::to_string(n) + ", b " + std::to_string(b));
  }
  try {
    const std::uint64_t grid = checked_pow(n / b, order);
    const std::uint64_t payload =
        checked_mul(checked_pow(b, order), simplex_count(n / b, order));
    if (grid > (std::uint64_t{1} << 32) || payload > (std::uint64_t{1} << 40)) {
      throw FormatError("BCSS tensor too large");
    }
  } catch (const OverflowError&) {
    throw FormatError("BCSS tensor too large");
  }
  BcssTensor a(order, static_cast<std::size_t>(n), static_cast<std::size_t>(b));
  detail::read_doubles(is, a.storage().payload());
  detail::expect_end(is);
  return a;
}

inline void save_tensor(const std::string& path, const DenseTensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  write_tensor(os, t);
}

inline DenseTensor load_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  return read_tensor(is);
}

}  // namespace symtensor
