#pragma once

// Command implementations behind symtensor_cli: verification sweeps,
// benchmarks, cost-model CSV and storage reports. Argument parsing lives in
// tools/; everything here writes to caller-supplied streams.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "symtensor/bcss.hpp"
#include "symtensor/cost_model.hpp"
#include "symtensor/dense.hpp"
#include "symtensor/errors.hpp"
#include "symtensor/io.hpp"
#include "symtensor/random.hpp"
#include "symtensor/sttsm.hpp"

namespace symtensor::cli {

enum class Command { Verify, Bench, Model, Storage };
enum class Algo { Naive, Scalar, Dense, Bcss, All };
enum class ModelSweep { Point, FixedBlock, FixedGrid };

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline constexpr std::uint64_t kDefaultMaxDenseElems = 10'000'000;

struct RunConfig {
  Command command = Command::Verify;
  std::optional<std::size_t> m;
  std::optional<std::size_t> n;
  std::optional<std::size_t> p;
  std::optional<std::size_t> b_a;
  std::optional<std::size_t> b_c;
  std::uint64_t seed = 1;
  std::string out;
  Algo algo = Algo::All;
  std::size_t reps = 3;
  bool csv = false;
  ModelSweep sweep = ModelSweep::Point;
  std::size_t nbar = 2;
  double meta_k = 0.0;
  /// Adds 1 to the first entry of this output block slot before checking.
  std::optional<std::size_t> inject_fault;
  std::string input;
  std::string save;
  bool strict = false;
  std::uint64_t max_dense_elems = kDefaultMaxDenseElems;
  double tol = 1e-10;
};

/// SYMTENSOR_MAX_DENSE_ELEMS, or the default when unset.
inline std::uint64_t max_dense_elems_from_env() {
  const char* v = std::getenv("SYMTENSOR_MAX_DENSE_ELEMS");
  if (v == nullptr || *v == '\0') return kDefaultMaxDenseElems;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v, &end, 10);
  if (*end != '\0' || x == 0) {
    throw ParameterError(std::string("SYMTENSOR_MAX_DENSE_ELEMS is not a positive integer: ") + v);
  }
  return x;
}

inline const char* to_string(Algo a) {
  switch (a) {
    case Algo::Naive: return "naive";
    case Algo::Scalar: return "scalar";
    case Algo::Dense: return "dense";
    case Algo::Bcss: return "bcss";
    case Algo::All: return "all";
  }
  return "?";
}

namespace detail {

struct Case {
  std::size_t m, n, p, b_a, b_c;
};

inline std::string describe(const Case& c) {
  std::ostringstream os;
  os << "(m=" << c.m << ", n=" << c.n << ", p=" << c.p << ", b_A=" << c.b_a
     << ", b_C=" << c.b_c << ")";
  return os.str();
}

inline void validate(const Case& c) {
  if (c.m < 2) throw ParameterError("order m must be at least 2, got " + std::to_string(c.m));
  if (c.m > kMaxOrder) throw ParameterError("order m above " + std::to_string(kMaxOrder));
  if (c.n == 0 || c.p == 0) throw ParameterError("n and p must be positive");
  if (c.b_a == 0 || c.n % c.b_a != 0) {
    throw ParameterError("b_A = " + std::to_string(c.b_a) + " does not divide n = " +
                         std::to_string(c.n));
  }
  if (c.b_c == 0 || c.p % c.b_c != 0) {
    throw ParameterError("b_C = " + std::to_string(c.b_c) + " does not divide p = " +
                         std::to_string(c.p));
  }
}

inline std::uint64_t dense_footprint(const Case& c) {
  return checked_pow(std::max(c.n, c.p), c.m);
}

inline bool wants(Algo selected, Algo a) {
  return selected == Algo::All || selected == a;
}

inline std::string format_index(const MultiIndex& idx) { return symtensor::to_string(idx); }

/// Output block with the largest deviation from the reference, by key.
inline MultiIndex worst_block(const BcssTensor& c, const BcssTensor& ref) {
  MultiIndex worst;
  double worst_dev = -1.0;
  for (std::size_t slot = 0; slot < c.num_blocks(); ++slot) {
    const auto got = c.block(slot);
    const auto want = ref.block(slot);
    double dev = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      dev = std::max(dev, std::abs(got[i] - want[i]));
    }
    if (dev > worst_dev) {
      worst_dev = dev;
      worst = c.block_key(slot);
    }
  }
  return worst;
}

}  // namespace detail

/// Cases a verify run covers: the default sweep, or the single configured one.
inline std::vector<detail::Case> verify_cases(const RunConfig& cfg) {
  std::vector<detail::Case> cases;
  if (!cfg.m && !cfg.n && !cfg.p && !cfg.b_a && !cfg.b_c) {
    for (std::size_t m : {2, 3, 4}) {
      for (std::size_t n : {4, 6}) {
        for (std::size_t b : {1, 2}) cases.push_back({m, n, n, b, b});
      }
    }
    return cases;
  }
  const std::size_t m = cfg.m.value_or(3);
  const std::size_t n = cfg.n.value_or(4);
  const std::size_t p = cfg.p.value_or(n);
  if (cfg.b_a) {
    cases.push_back({m, n, p, *cfg.b_a, cfg.b_c.value_or(*cfg.b_a)});
  } else {
    for (std::size_t b : {1, 2}) {
      if (n % b == 0 && p % b == 0) cases.push_back({m, n, p, b, cfg.b_c.value_or(b)});
    }
  }
  return cases;
}

/// Every selected algorithm against the unique-entry scalar loop nest, plus
/// the round-trip and symmetry invariants. Exit 0 iff every check passes.
inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<detail::Case> cases = verify_cases(cfg);
  std::optional<DenseTensor> input;
  if (!cfg.input.empty()) {
    input = load_tensor(cfg.input);
    for (auto& c : cases) {
      c.m = input->order();
      c.n = input->dim(0);
      if (!cfg.p) c.p = c.n;
    }
  }
  for (const auto& c : cases) {
    detail::validate(c);
    if (detail::dense_footprint(c) > cfg.max_dense_elems) {
      throw ParameterError("case " + detail::describe(c) +
                           " exceeds the dense oracle cap of " +
                           std::to_string(cfg.max_dense_elems) + " elements");
    }
  }

  if (cfg.csv) out << "m,n,p,b_A,b_C,algorithm,max_rel_error,status\n";
  bool all_ok = true;
  for (const auto& c : cases) {
    const RandomProblem pr = random_problem(cfg.seed, c.m, c.n, c.p);
    const DenseTensor a = input ? *input : pr.dense_a();
    const BcssTensor a_bcss = compress(a, c.b_a);
    const DenseTensor ref = sttsm_naive(a, pr.x);
    if (!cfg.save.empty()) save_tensor(cfg.save, ref);

    std::vector<std::pair<std::string, double>> errors;
    std::optional<MultiIndex> bad_block;
    if (detail::wants(cfg.algo, Algo::Naive)) {
      errors.emplace_back("naive_full", max_relative_error(sttsm_naive(a, pr.x, {}, true), ref));
    }
    if (detail::wants(cfg.algo, Algo::Scalar)) {
      errors.emplace_back("scalar", max_relative_error(sttsm_scalar_temps(a, pr.x), ref));
    }
    if (detail::wants(cfg.algo, Algo::Dense)) {
      errors.emplace_back("dense", max_relative_error(sttsm_dense_ttm(a, pr.x), ref));
    }
    if (detail::wants(cfg.algo, Algo::Bcss)) {
      for (bool reuse : {true, false}) {
        BlockedOptions opts;
        opts.exploit_partial_symmetry = reuse;
        BcssTensor cb = sttsm_bcss(a_bcss, pr.x, c.b_c, {}, opts);
        if (reuse && cfg.inject_fault) {
          cb.block(*cfg.inject_fault % cb.num_blocks())[0] += 1.0;
        }
        const double e = max_relative_error(decompress(cb), ref);
        if (e > cfg.tol && !bad_block) {
          bad_block = detail::worst_block(cb, compress(ref, c.b_c));
        }
        errors.emplace_back(reuse ? "bcss" : "bcss_noreuse", e);
      }
    }
    const bool roundtrip = bitwise_equal(decompress(a_bcss), a);

    bool ok = roundtrip;
    for (const auto& [name, e] : errors) ok = ok && e <= cfg.tol;
    all_ok = all_ok && ok;

    if (cfg.csv) {
      for (const auto& [name, e] : errors) {
        out << c.m << ',' << c.n << ',' << c.p << ',' << c.b_a << ',' << c.b_c
            << ',' << name << ',' << std::setprecision(3) << e << ','
            << (e <= cfg.tol ? "ok" : "FAIL") << '\n';
      }
    } else {
      out << detail::describe(c);
      for (const auto& [name, e] : errors) {
        out << ' ' << name << '=' << std::scientific << std::setprecision(2) << e
            << std::defaultfloat;
      }
      out << " roundtrip=" << (roundtrip ? "exact" : "MISMATCH") << ' '
          << (ok ? "ok" : "FAIL") << '\n';
    }
    if (!ok) {
      err << "verification failed for " << detail::describe(c);
      if (bad_block) err << " at output block " << detail::format_index(*bad_block);
      err << '\n';
    }
  }
  return all_ok ? kExitOk : kExitFailure;
}

struct BenchRow {
  std::string algorithm;
  detail::Case c;
  std::uint64_t seed = 0;
  bool skipped = false;
  double wall_seconds = 0.0;
  OpCounter ops;
};

namespace detail {

template <class Fn>
BenchRow time_algorithm(const std::string& name, const Case& c,
                        std::uint64_t seed, std::size_t reps, Fn&& fn) {
  BenchRow row{name, c, seed, false, 0.0, {}};
  std::vector<double> times;
  for (std::size_t r = 0; r < reps; ++r) {
    OpCounter counter;
    const ExecContext ctx{&counter};
    const auto t0 = std::chrono::steady_clock::now();
    fn(ctx);
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
    row.ops = counter;
  }
  std::sort(times.begin(), times.end());
  row.wall_seconds = times[times.size() / 2];
  return row;
}

}  // namespace detail

/// Times each selected algorithm on one seeded problem (median of reps).
/// naive and scalar are only run under "all" when their flop count is modest.
inline std::vector<BenchRow> run_bench(const RunConfig& cfg) {
  detail::Case c{cfg.m.value_or(3), cfg.n.value_or(16), 0, 0, 0};
  c.p = cfg.p.value_or(c.n);
  c.b_a = cfg.b_a.value_or(std::min<std::size_t>(4, c.n));
  c.b_c = cfg.b_c.value_or(c.b_a);
  detail::validate(c);
  if (cfg.reps < 3) throw ParameterError("--reps must be at least 3");

  const RandomProblem pr = random_problem(cfg.seed, c.m, c.n, c.p);
  const bool dense_fits = detail::dense_footprint(c) <= cfg.max_dense_elems;
  std::optional<DenseTensor> a;
  if (dense_fits) a = pr.dense_a();

  constexpr std::uint64_t kScalarFlopBudget = 2'000'000'000;
  std::vector<BenchRow> rows;
  auto skipped = [&](const char* name) {
    rows.push_back({name, c, cfg.seed, true, 0.0, {}});
  };
  const auto run_scalar_kind = [&](Algo kind, const char* name, std::uint64_t flops,
                                   auto&& fn) {
    if (!detail::wants(cfg.algo, kind)) return;
    if (!dense_fits || (cfg.algo == Algo::All && flops > kScalarFlopBudget)) {
      skipped(name);
      return;
    }
    rows.push_back(detail::time_algorithm(name, c, cfg.seed, cfg.reps, fn));
  };

  run_scalar_kind(Algo::Naive, "naive", naive_flops(c.m, c.n, c.p),
                  [&](const ExecContext& ctx) { sttsm_naive(*a, pr.x, ctx); });
  run_scalar_kind(Algo::Scalar, "scalar", scalar_temps_flops(c.m, c.n, c.p),
                  [&](const ExecContext& ctx) { sttsm_scalar_temps(*a, pr.x, ctx); });
  if (detail::wants(cfg.algo, Algo::Dense)) {
    if (dense_fits) {
      rows.push_back(detail::time_algorithm(
          "dense", c, cfg.seed, cfg.reps,
          [&](const ExecContext& ctx) { sttsm_dense_ttm(*a, pr.x, ctx); }));
    } else {
      skipped("dense");
    }
  }
  if (detail::wants(cfg.algo, Algo::Bcss)) {
    const BcssTensor ab = pr.bcss_a(c.b_a);
    rows.push_back(detail::time_algorithm(
        "bcss", c, cfg.seed, cfg.reps,
        [&](const ExecContext& ctx) { sttsm_bcss(ab, pr.x, c.b_c, ctx); }));
  }
  return rows;
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "algorithm,m,n,p,b_A,b_C,seed,wall_seconds,flops,memops\n";
  for (const auto& r : rows) {
    out << r.algorithm << ',' << r.c.m << ',' << r.c.n << ',' << r.c.p << ','
        << r.c.b_a << ',' << r.c.b_c << ',' << r.seed << ',';
    if (r.skipped) {
      out << "skipped,skipped,skipped\n";
    } else {
      out << std::setprecision(6) << r.wall_seconds << ',' << r.ops.flops << ','
          << r.ops.memops << '\n';
    }
  }
}

inline int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto rows = run_bench(cfg);
  write_bench_csv(out, rows);
  const BenchRow* dense = nullptr;
  const BenchRow* bcss = nullptr;
  for (const auto& r : rows) {
    if (r.algorithm == "dense") dense = &r;
    if (r.algorithm == "bcss") bcss = &r;
  }
  if (dense && bcss) {
    if (dense->skipped) {
      err << "dense skipped: " << detail::dense_footprint(dense->c)
          << " elements exceed SYMTENSOR_MAX_DENSE_ELEMS=" << cfg.max_dense_elems << '\n';
    } else {
      err << "speedup dense/bcss: wall " << std::setprecision(3)
          << dense->wall_seconds / bcss->wall_seconds << "x, flops "
          << static_cast<double>(dense->ops.flops) / static_cast<double>(bcss->ops.flops)
          << "x\n";
      if (cfg.strict && bcss->wall_seconds > dense->wall_seconds) {
        err << "strict: bcss slower than dense\n";
        return kExitFailure;
      }
    }
  }
  return kExitOk;
}

inline void write_cost_row(std::ostream& out, const CostReport& r) {
  const auto& q = r.params;
  out << to_string(r.variant) << ',' << q.m << ',' << q.n << ',' << q.p << ','
      << q.b_a << ',' << q.b_c << ',' << r.storage_a << ',' << r.storage_c << ','
      << r.storage_x << ',' << r.storage_temps_total() << ',' << r.flops << ','
      << r.memops << '\n';
}

/// Cost-model CSV: a single point, fixed block dimension with n growing, or a
/// fixed number of blocks per mode with n growing.
inline int cmd_model(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.meta_k < 0.0 || cfg.meta_k != static_cast<double>(static_cast<std::uint64_t>(cfg.meta_k))) {
    throw ParameterError("--meta-k must be a non-negative integer for the model");
  }
  const auto k = static_cast<std::uint64_t>(cfg.meta_k);
  out << "variant,m,n,p,b_A,b_C,storage_A,storage_C,storage_X,storage_temps,flops,memops\n";
  auto emit = [&](std::size_t m, std::size_t n, std::size_t p, std::size_t b_a,
                  std::size_t b_c) {
    write_cost_row(out, bcss_costs(m, n, p, b_a, b_c, k));
    write_cost_row(out, dense_costs(m, n, p));
  };
  std::vector<std::size_t> orders;
  if (cfg.m) {
    orders.push_back(*cfg.m);
  } else {
    for (std::size_t m = 2; m <= 6; ++m) orders.push_back(m);
  }
  switch (cfg.sweep) {
    case ModelSweep::Point: {
      const std::size_t m = cfg.m.value_or(3);
      const std::size_t n = cfg.n.value_or(16);
      const std::size_t p = cfg.p.value_or(n);
      const std::size_t b_a = cfg.b_a.value_or(std::min<std::size_t>(8, n));
      emit(m, n, p, b_a, cfg.b_c.value_or(b_a));
      break;
    }
    case ModelSweep::FixedBlock: {
      const std::size_t b = cfg.b_a.value_or(8);
      const std::size_t n_max = cfg.n.value_or(8 * b);
      if (b == 0 || n_max < b) throw ParameterError("fixed-block sweep needs 0 < b <= n");
      for (std::size_t m : orders) {
        for (std::size_t n = b; n <= n_max; n += b) emit(m, n, n, b, b);
      }
      break;
    }
    case ModelSweep::FixedGrid: {
      if (cfg.nbar == 0) throw ParameterError("--nbar must be positive");
      const std::size_t n_max = cfg.n.value_or(64);
      for (std::size_t m : orders) {
        for (std::size_t b = 1; b * cfg.nbar <= n_max; ++b) {
          emit(m, b * cfg.nbar, b * cfg.nbar, b, b);
        }
      }
      break;
    }
  }
  return kExitOk;
}

/// Storage with meta-data over every divisor b of n. The per-entry meta cost
/// k is measured from the record layout; small grids are also allocated and
/// their measured sizes cross-checked against the formula.
inline int cmd_storage(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::size_t m = cfg.m.value_or(5);
  const std::size_t n = cfg.n.value_or(64);
  if (m < 1 || m > kMaxOrder) throw ParameterError("order out of range");
  if (n == 0) throw ParameterError("n must be positive");
  const double k = cfg.meta_k > 0.0 ? cfg.meta_k : PartialSymTensor::meta_words_per_entry;
  const MetadataSweep sweep = metadata_sweep(m, n, k);

  constexpr std::uint64_t kMeasureCap = 1u << 25;
  bool consistent = true;
  if (cfg.csv) {
    out << "b,nbar,payload,meta_entries,meta_bytes,k,total_with_meta,dense,measured\n";
  } else {
    out << "m=" << m << " n=" << n << " dense=" << checked_pow(n, m)
        << " k=" << k << " (float-equivalents per meta entry)\n";
  }
  for (const auto& pt : sweep.points) {
    const std::uint64_t meta_bytes = pt.meta_entries * sizeof(MetaEntry);
    bool measured = false;
    if (pt.meta_entries <= kMeasureCap && pt.payload <= kMeasureCap) {
      const BcssTensor t(m, n, pt.b);
      measured = true;
      if (t.payload_size() != pt.payload || t.meta_entry_count() != pt.meta_entries) {
        consistent = false;
        err << "measured storage disagrees with formula at b=" << pt.b << '\n';
      }
    }
    if (cfg.csv) {
      out << pt.b << ',' << pt.nbar << ',' << pt.payload << ',' << pt.meta_entries
          << ',' << meta_bytes << ',' << k << ',' << std::setprecision(17)
          << pt.total_with_meta << ',' << pt.dense << ',' << (measured ? "yes" : "no")
          << '\n';
    } else {
      out << "  b=" << std::setw(4) << pt.b << "  payload=" << std::setw(12)
          << pt.payload << "  meta=" << std::setw(12) << pt.meta_entries
          << " entries  total=" << std::setw(14) << std::setprecision(12)
          << pt.total_with_meta << "  dense/total=" << std::setprecision(4)
          << static_cast<double>(pt.dense) / pt.total_with_meta
          << (measured ? "  [measured]" : "") << '\n';
    }
  }
  if (!cfg.csv) out << "argmin b=" << sweep.points[sweep.argmin].b << '\n';
  return consistent ? kExitOk : kExitFailure;
}

/// Dispatch; parameter and shape problems map to the usage exit code.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    switch (cfg.command) {
      case Command::Verify: return cmd_verify(cfg, out, err);
      case Command::Bench: return cmd_bench(cfg, out, err);
      case Command::Model: return cmd_model(cfg, out, err);
      case Command::Storage: return cmd_storage(cfg, out, err);
    }
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SymmetryError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const OverflowError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace symtensor::cli
