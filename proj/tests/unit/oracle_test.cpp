#include <gtest/gtest.h>

#include "collapse/exec.hpp"
#include "collapse/parser.hpp"

namespace collapse {
namespace {

struct Outcome {
  DeviceMemory memory;
  BufferId a = 0;
  std::vector<std::int32_t> out() const {
    std::vector<std::int32_t> v(memory.size_bytes(a) / 4);
    memory.copy_to_host(v.data(), a, v.size() * 4);
    return v;
  }
};

Outcome run(const std::string& src, std::vector<std::int32_t> data, int block, int grid = 1, ExecTrace* trace = nullptr,
        OracleOptions options = {}) {
  Outcome r;
  r.a = r.memory.alloc(data.size() * 4);
  r.memory.copy_to_device(r.a, data.data(), data.size() * 4);
  LaunchConfig c;
  c.block_size = block;
  c.grid_size = grid;
  run_oracle(parse_module(src).kernels.at(0), c, r.memory, {KernelArg::buf(r.a)}, trace, options);
  return r;
}

ExecErrorKind error_kind(const std::string& src, int n, int block) {
  try {
    run(src, std::vector<std::int32_t>(static_cast<std::size_t>(n), 1), block);
  } catch (const ExecError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error";
  return ExecErrorKind::BadArguments;
}

TEST(Oracle, WarpSumSumsTheFirstWarp) {
  const std::string src = R"(
__global__ void warp_sum(global i32* data) {
  i32 val = data[threadIdx.x];
  if (threadIdx.x < 32) {
    for (i32 offset = 16; offset > 0; offset /= 2) val += shfl_down(val, offset);
    data[threadIdx.x] = val;
  }
})";
  Outcome r = run(src, std::vector<std::int32_t>(64, 1), 64);
  const auto out = r.out();
  EXPECT_EQ(out[0], 32);
  for (int lane = 32; lane < 64; ++lane) EXPECT_EQ(out[static_cast<std::size_t>(lane)], 1);
}

TEST(Oracle, WarpSumWithDistinctValuesMatchesATreeReduction) {
  std::vector<std::int32_t> data(32);
  for (int i = 0; i < 32; ++i) data[static_cast<std::size_t>(i)] = i * i;
  Outcome r = run(R"(
__global__ void k(global i32* data) {
  i32 val = data[threadIdx.x];
  for (i32 offset = 16; offset > 0; offset /= 2) val += shfl_down(val, offset);
  data[threadIdx.x] = val;
})", data, 32);
  std::int32_t sum = 0;
  for (auto v : data) sum += v;
  EXPECT_EQ(r.out()[0], sum);
}

TEST(Oracle, VoteAllOverTrueGivesOneEverywhere) {
  Outcome r = run("__global__ void k(global i32* a) { a[threadIdx.x] = vote_all(a[threadIdx.x] > 0); }",
              std::vector<std::int32_t>(64, 5), 64);
  for (auto v : r.out()) EXPECT_EQ(v, 1);
  std::vector<std::int32_t> data(64, 5);
  data[40] = 0;
  Outcome s = run("__global__ void k(global i32* a) { a[threadIdx.x] = vote_all(a[threadIdx.x] > 0); }", data, 64);
  const auto out = s.out();
  for (int i = 0; i < 64; ++i) EXPECT_EQ(out[static_cast<std::size_t>(i)], i < 32 ? 1 : 0);
}

TEST(Oracle, SharedMemoryIsVisibleAfterABlockBarrier) {
  Outcome r = run(R"(
__global__ void k(global i32* a) {
  __shared__ i32 sh[64];
  sh[threadIdx.x] = threadIdx.x;
  __syncthreads();
  a[threadIdx.x] = sh[blockDim.x - 1 - threadIdx.x];
})", std::vector<std::int32_t>(64, 0), 64);
  const auto out = r.out();
  for (int i = 0; i < 64; ++i) EXPECT_EQ(out[static_cast<std::size_t>(i)], 63 - i);
}

TEST(Oracle, DivergentBarriersAreViolations) {
  EXPECT_EQ(error_kind("__global__ void k(global i32* a) { if (threadIdx.x % 2) __syncwarp(); }", 32, 32),
            ExecErrorKind::BarrierViolation);
  EXPECT_EQ(error_kind("__global__ void k(global i32* a) { if (threadIdx.x < 32) __syncthreads(); }", 64, 64),
            ExecErrorKind::BarrierViolation);
  EXPECT_EQ(error_kind("__global__ void k(global i32* a) { if (threadIdx.x < 3) a[0] = vote_any(1 > 0); }", 32, 32),
            ExecErrorKind::BarrierViolation);
}

TEST(Oracle, WarpUniformBarrierIsFine) {
  Outcome r = run(R"(
__global__ void k(global i32* a) {
  if (threadIdx.x < 32) {
    __syncwarp();
    a[threadIdx.x] = 2;
  }
})", std::vector<std::int32_t>(64, 0), 64);
  EXPECT_EQ(r.out()[0], 2);
  EXPECT_EQ(r.out()[63], 0);
}

TEST(Oracle, OutOfBoundsAccessIsReported) {
  EXPECT_EQ(error_kind("__global__ void k(global i32* a) { a[threadIdx.x + 4] = 1; }", 8, 8),
            ExecErrorKind::OutOfBounds);
  EXPECT_EQ(error_kind("__global__ void k(global i32* a) { a[0] = a[0 - 1]; }", 8, 8), ExecErrorKind::OutOfBounds);
  EXPECT_EQ(error_kind(R"(
__global__ void k(global i32* a) {
  __shared__ i32 sh[4];
  sh[threadIdx.x] = 1;
})", 8, 8), ExecErrorKind::OutOfBounds);
}

TEST(Oracle, StepLimitStopsRunawayLoops) {
  OracleOptions opt;
  opt.step_limit = 1000;
  try {
    run("__global__ void k(global i32* a) { for (i32 i = 0; i < 100000; i++) a[0] += 1; }", {0}, 1, 1, nullptr, opt);
    FAIL();
  } catch (const ExecError& e) {
    EXPECT_EQ(e.kind(), ExecErrorKind::StepLimit);
  }
}

TEST(Oracle, TraceCountsEveryThreadExecution) {
  ExecTrace trace;
  run("__global__ void k(global i32* a) { if (threadIdx.x < 5) a[threadIdx.x] = 1; }",
      std::vector<std::int32_t>(32, 0), 32, 2, &trace);
  std::uint64_t max = 0;
  std::uint64_t min = ~std::uint64_t{0};
  for (const auto& [key, n] : trace.counts) {
    max = std::max(max, n);
    if (key[0] == 'i') min = std::min(min, n);
  }
  EXPECT_EQ(max, 64U);   // the branch runs once per thread of both blocks
  EXPECT_EQ(min, 10U);   // the guarded store
}

TEST(Oracle, PartialWarpsOnlyVoteOverLiveLanes) {
  Outcome r = run("__global__ void k(global i32* a) { a[threadIdx.x] = vote_all(threadIdx.x < 40); }",
              std::vector<std::int32_t>(40, 0), 40);
  for (auto v : r.out()) EXPECT_EQ(v, 1);
}

}  // namespace
}  // namespace collapse
