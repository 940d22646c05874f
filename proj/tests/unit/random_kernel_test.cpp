#include <gtest/gtest.h>

#include <set>

#include "collapse/parser.hpp"
#include "random_kernel.hpp"
#include "trace_check.hpp"

namespace collapse::testing {
namespace {

TEST(RandomKernel, GenerationIsDeterministic) {
  RandomKernel a = generate_kernel(42);
  RandomKernel b = generate_kernel(42);
  EXPECT_EQ(a.source, b.source);
  EXPECT_EQ(a.input, b.input);
  EXPECT_NE(a.source, generate_kernel(43).source);
}

TEST(RandomKernel, EveryKernelParses) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RandomKernel k = generate_kernel(seed);
    EXPECT_NO_THROW(parse_module(k.source)) << k.source;
  }
}

TEST(RandomKernel, BlockSizesCoverTheConfiguredSet) {
  std::set<int> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) seen.insert(generate_kernel(seed).block_size);
  EXPECT_EQ(seen, (std::set<int>{4, 8, 12, 16}));
}

TEST(RandomKernel, DifferentialSample) {
  for (std::uint64_t seed = 1000; seed < 1200; ++seed) {
    RandomKernel k = generate_kernel(seed);
    auto failures = check_random_kernel(k);
    EXPECT_TRUE(failures.empty()) << failures.front() << "\n" << k.source;
  }
}

TEST(RandomKernel, ExecutionCountsMatchInterpreter) {
  for (std::uint64_t seed = 2000; seed < 2100; ++seed) {
    RandomKernel k = generate_kernel(seed);
    const KernelDef def = parse_module(k.source).kernels.front();
    TransformOptions topt;
    topt.mode = CollapseMode::Hier;
    topt.warp_size = k.warp_size;
    MpmdProgram prog = hybrid_transform(def, topt);

    RandomLaunch a = prepare_launch(k);
    ExecTrace expected;
    run_oracle(def, a.config, a.memory, a.args, &expected);
    RandomLaunch b = prepare_launch(k);
    ExecTrace actual;
    launch(prog, b.config, b.memory, b.args, &actual);

    auto problems = compare_traces(expected, actual, prog, k.block_size, false);
    EXPECT_TRUE(problems.empty()) << problems.front() << "\n" << k.source;
  }
}

}  // namespace
}  // namespace collapse::testing
