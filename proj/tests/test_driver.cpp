#include <gtest/gtest.h>

#include <sstream>

#include "symtensor/driver.hpp"

using namespace symtensor;
using namespace symtensor::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cfg(const RunConfig& cfg) {
  std::ostringstream out, err;
  const int code = run(cfg, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) v.push_back(l);
  return v;
}

std::vector<std::string> split(const std::string& l) {
  std::vector<std::string> f;
  std::istringstream is(l);
  for (std::string x; std::getline(is, x, ',');) f.push_back(x);
  return f;
}

}  // namespace

TEST(Verify, DefaultSweepPasses) {
  const Result r = run_cfg(RunConfig{});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(lines(r.out).size(), 12u);
}

TEST(Verify, InjectedFaultNamesTheBlock) {
  RunConfig cfg;
  cfg.m = 3;
  cfg.n = 4;
  cfg.b_a = 2;
  cfg.inject_fault = 2;  // slot 2 of the 2-grid hypertriangle is (0,1,1)
  const Result r = run_cfg(cfg);
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("(m=3, n=4, p=4, b_A=2, b_C=2)"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("block (0,1,1)"), std::string::npos) << r.err;
}

TEST(Verify, OrderOneIsUsageError) {
  RunConfig cfg;
  cfg.m = 1;
  const Result r = run_cfg(cfg);
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_TRUE(r.out.empty());
}

TEST(Verify, DenseCapIsUsageError) {
  RunConfig cfg;
  cfg.m = 4;
  cfg.n = 12;
  cfg.max_dense_elems = 1000;
  EXPECT_EQ(run_cfg(cfg).code, kExitUsage);
}

TEST(Verify, CsvOutputAndInputFile) {
  const std::string path = ::testing::TempDir() + "symtensor_driver_a.stns";
  save_tensor(path, random_symmetric(3, 3, 4));
  RunConfig cfg;
  cfg.input = path;
  cfg.b_a = 2;
  cfg.csv = true;
  cfg.algo = Algo::Bcss;
  const Result r = run_cfg(cfg);
  EXPECT_EQ(r.code, kExitOk) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 3u);
  EXPECT_EQ(ls[0], "m,n,p,b_A,b_C,algorithm,max_rel_error,status");
  EXPECT_EQ(split(ls[1])[5], "bcss");
  EXPECT_EQ(split(ls[1]).back(), "ok");
}

TEST(Bench, RowsAgreeWithModel) {
  RunConfig cfg;
  cfg.command = Command::Bench;
  cfg.m = 3;
  cfg.n = 8;
  cfg.b_a = 4;
  const auto rows = run_bench(cfg);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& row : rows) {
    ASSERT_FALSE(row.skipped) << row.algorithm;
    if (row.algorithm == "bcss") {
      EXPECT_EQ(row.ops.flops, bcss_costs(3, 8, 8, 4, 4).flops);
      EXPECT_EQ(row.ops.memops, bcss_costs(3, 8, 8, 4, 4).memops);
    } else if (row.algorithm == "dense") {
      EXPECT_EQ(row.ops.flops, dense_costs(3, 8, 8).flops);
    } else if (row.algorithm == "naive") {
      EXPECT_EQ(row.ops.flops, naive_flops(3, 8, 8));
    } else {
      EXPECT_EQ(row.ops.flops, scalar_temps_flops(3, 8, 8));
    }
  }
}

TEST(Bench, FullBlockFlopsEqualDense) {
  RunConfig cfg;
  cfg.command = Command::Bench;
  cfg.m = 3;
  cfg.n = 6;
  cfg.b_a = 6;
  cfg.algo = Algo::All;
  const auto rows = run_bench(cfg);
  std::uint64_t dense = 0, bcss = 1;
  for (const auto& r : rows) {
    if (r.algorithm == "dense") dense = r.ops.flops;
    if (r.algorithm == "bcss") bcss = r.ops.flops;
  }
  EXPECT_EQ(dense, bcss);
}

TEST(Bench, OversizedDenseIsSkipped) {
  RunConfig cfg;
  cfg.command = Command::Bench;
  cfg.m = 8;
  cfg.n = 16;
  cfg.b_a = 16;
  cfg.algo = Algo::Dense;
  const Result r = run_cfg(cfg);
  EXPECT_EQ(r.code, kExitOk);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(ls[1], "dense,8,16,16,16,16,1,skipped,skipped,skipped");
}

TEST(Bench, CsvIsDeterministicApartFromTime) {
  RunConfig cfg;
  cfg.command = Command::Bench;
  cfg.m = 3;
  cfg.n = 6;
  cfg.b_a = 3;
  cfg.seed = 99;
  const auto a = lines(run_cfg(cfg).out);
  const auto b = lines(run_cfg(cfg).out);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(a[0], "algorithm,m,n,p,b_A,b_C,seed,wall_seconds,flops,memops");
  for (std::size_t i = 1; i < a.size(); ++i) {
    auto fa = split(a[i]);
    auto fb = split(b[i]);
    fa[7] = fb[7] = "";
    EXPECT_EQ(fa, fb);
  }
}

TEST(Bench, RejectsFewReps) {
  RunConfig cfg;
  cfg.command = Command::Bench;
  cfg.reps = 2;
  EXPECT_EQ(run_cfg(cfg).code, kExitUsage);
}

TEST(Model, PointRowsEqualCostModel) {
  RunConfig cfg;
  cfg.command = Command::Model;
  cfg.m = 2;
  cfg.n = 512;
  cfg.b_a = 32;
  const Result r = run_cfg(cfg);
  ASSERT_EQ(r.code, kExitOk);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 3u);
  EXPECT_EQ(ls[0], "variant,m,n,p,b_A,b_C,storage_A,storage_C,storage_X,storage_temps,flops,memops");
  const auto bcss = split(ls[1]);
  const auto dense = split(ls[2]);
  EXPECT_EQ(bcss[0], "BCSS");
  EXPECT_EQ(dense[0], "Dense");
  EXPECT_NEAR(std::stod(dense[6]) / std::stod(bcss[6]), 1.88, 0.005);
  EXPECT_EQ(std::stoull(bcss[10]), bcss_costs(2, 512, 512, 32, 32).flops);
}

TEST(Model, FixedBlockStorageBelowDense) {
  RunConfig cfg;
  cfg.command = Command::Model;
  cfg.sweep = ModelSweep::FixedBlock;
  const auto ls = lines(run_cfg(cfg).out);
  ASSERT_EQ(ls.size(), 1u + 5 * 8 * 2);
  for (std::size_t i = 1; i < ls.size(); i += 2) {
    const auto bcss = split(ls[i]);
    const auto dense = split(ls[i + 1]);
    EXPECT_LE(std::stoull(bcss[6]), std::stoull(dense[6]));
  }
}

TEST(Model, FixedGridTradesStorageForMemops) {
  RunConfig cfg;
  cfg.command = Command::Model;
  cfg.sweep = ModelSweep::FixedGrid;
  cfg.m = 3;
  cfg.n = 32;
  const auto ls = lines(run_cfg(cfg).out);
  ASSERT_EQ(ls.size(), 1u + 16 * 2);
  const auto first = split(ls[1]), first_dense = split(ls[2]);
  const auto last = split(ls[ls.size() - 2]), last_dense = split(ls.back());
  const double mem_first = std::stod(first_dense[11]) / std::stod(first[11]);
  const double mem_last = std::stod(last_dense[11]) / std::stod(last[11]);
  const double sto_first = std::stod(first_dense[6]) / std::stod(first[6]);
  const double sto_last = std::stod(last_dense[6]) / std::stod(last[6]);
  EXPECT_DOUBLE_EQ(sto_first, sto_last);
  EXPECT_GT(mem_last, 0.0);
  EXPECT_GE(mem_last, mem_first);
}

TEST(Model, DeterministicOutput) {
  RunConfig cfg;
  cfg.command = Command::Model;
  cfg.sweep = ModelSweep::FixedGrid;
  EXPECT_EQ(run_cfg(cfg).out, run_cfg(cfg).out);
}

TEST(Storage, OrderFiveInteriorMinimum) {
  RunConfig cfg;
  cfg.command = Command::Storage;
  cfg.csv = true;
  const Result r = run_cfg(cfg);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 8u);
  const double dense = std::pow(64.0, 5);
  EXPECT_GT(std::stod(split(ls[1])[6]), dense);
  EXPECT_EQ(split(ls[7])[2], std::to_string(1ULL << 30));
  EXPECT_EQ(split(ls[3])[8], "yes");
  EXPECT_EQ(split(ls[4])[8], "yes");
  EXPECT_EQ(split(ls[1])[5], "2");
}

TEST(Storage, TextReportNamesArgmin) {
  RunConfig cfg;
  cfg.command = Command::Storage;
  cfg.m = 5;
  cfg.n = 64;
  const Result r = run_cfg(cfg);
  EXPECT_NE(r.out.find("argmin b="), std::string::npos);
}
