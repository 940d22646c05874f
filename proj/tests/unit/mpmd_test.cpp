#include <gtest/gtest.h>

#include "collapse/exec.hpp"
#include "collapse/parser.hpp"
#include "corpus.hpp"
#include "trace_check.hpp"

namespace collapse {
namespace {

struct Traced {
  ExecTrace oracle;
  ExecTrace mpmd;
  MpmdProgram program;
};

Traced trace_case(const std::string& name, int block, CollapseMode mode, bool spec) {
  testing::CorpusCase c = testing::load_case_at(name, block);
  const Workload& w = c.launches.at(0);
  Traced t;
  TransformOptions opt;
  opt.mode = mode;
  t.program = hybrid_transform(w.kernel, opt);
  if (spec) t.program = specialize(t.program, w.config.block_size, w.config.grid_size);
  DeviceMemory a = w.memory;
  run_oracle(w.kernel, w.config, a, w.args, &t.oracle);
  DeviceMemory b = w.memory;
  LaunchConfig config = w.config;
  config.specialize = spec;
  launch(t.program, config, b, w.args, &t.mpmd);
  return t;
}

TEST(MpmdTrace, WarpSumRunsEachOriginalInstructionOncePerThread) {
  Traced t = trace_case("warp_sum", 64, CollapseMode::Hier, false);
  auto problems = testing::compare_traces(t.oracle, t.mpmd, t.program, 64, false);
  EXPECT_TRUE(problems.empty()) << (problems.empty() ? "" : problems.front());
  int peel_keys = 0;
  bool per_warp = false;
  for (const auto& [key, n] : t.mpmd.counts) {
    if (!key.ends_with(".peel")) continue;
    ++peel_keys;
    // The guard of the first warp test runs once in each of the two warps.
    per_warp = per_warp || n == 2;
    EXPECT_LE(n, 6U) << key;
  }
  EXPECT_GE(peel_keys, 2);
  EXPECT_TRUE(per_warp);
  // The shuffle loop body runs five times in each of the 32 lanes of warp 0.
  bool body = false;
  for (const auto& [key, n] : t.oracle.counts) body = body || n == 160;
  EXPECT_TRUE(body);
}

TEST(MpmdTrace, CorpusCountsAgreeWithTheInterpreter) {
  for (const auto& name : testing::corpus_names()) {
    for (int block : {32, 64}) {
      for (bool spec : {false, true}) {
        SCOPED_TRACE(name + " block " + std::to_string(block) + (spec ? " specialized" : ""));
        Traced t = trace_case(name, block, CollapseMode::Hier, spec);
        auto problems = testing::compare_traces(t.oracle, t.mpmd, t.program, block, spec);
        EXPECT_TRUE(problems.empty()) << (problems.empty() ? "" : problems.front());
      }
    }
  }
}

TEST(MpmdTrace, SkippingExtraBarriersBreaksTheCounts) {
  testing::CorpusCase c = testing::load_case_at("barrier_in_if", 64);
  const Workload& w = c.launches.at(0);
  TransformOptions opt;
  opt.mode = CollapseMode::Hier;
  opt.skip_extra = true;
  opt.verify = false;
  MpmdProgram p = hybrid_transform(w.kernel, opt);
  DeviceMemory a = w.memory;
  DeviceMemory b = w.memory;
  ExecTrace oracle;
  ExecTrace mpmd;
  run_oracle(w.kernel, w.config, a, w.args, &oracle);
  bool broken = false;
  try {
    launch(p, w.config, b, w.args, &mpmd);
    broken = !testing::compare_traces(oracle, mpmd, p, 64, false).empty();
  } catch (const Error&) {
    broken = true;
  }
  EXPECT_TRUE(broken);
}

TEST(MpmdExec, LocalsPersistAcrossRegionsPerThread) {
  KernelDef k = parse_module(R"(
__global__ void k(global i32* a) {
  i32 mine = threadIdx.x * 3;
  __syncthreads();
  i32 other = a[(threadIdx.x + 1) % blockDim.x];
  __syncthreads();
  a[threadIdx.x] = mine + other;
})").kernels.at(0);
  for (CollapseMode mode : {CollapseMode::Flat, CollapseMode::Hier}) {
    TransformOptions opt;
    opt.mode = mode;
    MpmdProgram p = hybrid_transform(k, opt);
    DeviceMemory m;
    BufferId a = m.alloc(64 * 4);
    std::vector<std::int32_t> init(64);
    for (int i = 0; i < 64; ++i) init[static_cast<std::size_t>(i)] = 100 + i;
    m.copy_to_device(a, init.data(), 256);
    LaunchConfig c;
    c.block_size = 64;
    launch(p, c, m, {KernelArg::buf(a)});
    std::vector<std::int32_t> out(64);
    m.copy_to_host(out.data(), a, 256);
    for (int i = 0; i < 64; ++i) EXPECT_EQ(out[static_cast<std::size_t>(i)], 3 * i + 100 + (i + 1) % 64);
  }
}

TEST(MpmdExec, EarlyReturnSkipsTheRestOfTheThread) {
  KernelDef k = parse_module(R"(
__global__ void k(global i32* a) {
  i32 v = vote_any(threadIdx.x == 5);
  if (threadIdx.x % 2 == 1) return;
  a[threadIdx.x] = v + 1;
})").kernels.at(0);
  MpmdProgram p = hybrid_transform(k, {});
  DeviceMemory m;
  BufferId a = m.alloc(64 * 4);
  LaunchConfig c;
  c.block_size = 64;
  DiffReport r = diff_run(k, p, c, m, {KernelArg::buf(a)});
  EXPECT_TRUE(r.equal) << r.text();
  launch(p, c, m, {KernelArg::buf(a)});
  std::vector<std::int32_t> out(64);
  m.copy_to_host(out.data(), a, 256);
  for (int i = 0; i < 64; ++i) EXPECT_EQ(out[static_cast<std::size_t>(i)], i % 2 ? 0 : (i < 32 ? 2 : 1));
}

TEST(MpmdExec, OutOfBoundsIsAnExecError) {
  MpmdProgram p = hybrid_transform(parse_module("__global__ void k(global i32* a) { a[threadIdx.x] = 1; }").kernels.at(0),
                                   {});
  DeviceMemory m;
  BufferId a = m.alloc(16);
  LaunchConfig c;
  try {
    launch(p, c, m, {KernelArg::buf(a)});
    FAIL();
  } catch (const ExecError& e) {
    EXPECT_EQ(e.kind(), ExecErrorKind::OutOfBounds);
  }
}

}  // namespace
}  // namespace collapse
