#include <gtest/gtest.h>

#include "collapse/dump.hpp"
#include "collapse/exec.hpp"
#include "collapse/parser.hpp"
#include "collapse/transform.hpp"
#include "corpus.hpp"

namespace collapse {
namespace {

KernelDef corpus_kernel(const std::string& name) { return testing::load_case(name).module.kernels.at(0); }

MpmdProgram transform(const KernelDef& k, CollapseMode mode, int warp_size = 32) {
  TransformOptions opt;
  opt.mode = mode;
  opt.warp_size = warp_size;
  return hybrid_transform(k, opt);
}

int blocks_named(const KernelIR& ir, const std::string& stem) {
  int n = 0;
  for (const auto& b : ir.cfg.blocks) n += b.name == stem ? 1 : 0;
  return n;
}

const ReplicatedLocal* replicated(const MpmdProgram& p, const std::string& name) {
  for (const auto& r : p.replicated) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

int barrier_count(const KernelIR& ir) {
  int n = 0;
  for (const auto& b : ir.cfg.blocks) {
    for (const auto& in : b.instrs) n += in.kind == InstrKind::Barrier ? 1 : 0;
  }
  return n;
}

TEST(HybridTransform, AutoPicksFlatForBarrierFreeKernels) {
  MpmdProgram p = transform(corpus_kernel("vecadd"), CollapseMode::Auto);
  EXPECT_EQ(p.mode, CollapseMode::Flat);
  EXPECT_EQ(blocks_named(p.ir, "flat_cond"), 1);
  EXPECT_EQ(blocks_named(p.ir, "intra_warp_cond"), 0);
  EXPECT_TRUE(p.replicated.empty());
  // The single loop runs over the whole block.
  for (const auto& b : p.ir.cfg.blocks) {
    if (b.name == "flat_cond") {
      EXPECT_NE(print_expr(b.term.cond).find("blockDim.x"), std::string::npos);
    }
  }
}

TEST(HybridTransform, AutoPicksHierarchicalForWarpFeatures) {
  EXPECT_EQ(transform(corpus_kernel("warp_sum"), CollapseMode::Auto).mode, CollapseMode::Hier);
  EXPECT_EQ(transform(corpus_kernel("split_syncwarp"), CollapseMode::Auto).mode, CollapseMode::Hier);
}

TEST(HybridTransform, FlatRejectsWarpFeatures) {
  try {
    transform(corpus_kernel("warp_sum"), CollapseMode::Flat);
    FAIL() << "flat collapsing accepted a warp shuffle";
  } catch (const TransformError& e) {
    EXPECT_EQ(e.kind(), TransformErrorKind::UnsupportedFeature);
  }
}

TEST(HybridTransform, BlockSizeMustBeAWarpMultiple) {
  TransformOptions opt;
  opt.mode = CollapseMode::Hier;
  opt.block_size = 48;
  try {
    hybrid_transform(corpus_kernel("warp_sum"), opt);
    FAIL();
  } catch (const TransformError& e) {
    EXPECT_EQ(e.kind(), TransformErrorKind::Configuration);
  }
  opt.warp_size = 0;
  EXPECT_THROW(hybrid_transform(corpus_kernel("warp_sum"), opt), TransformError);
}

TEST(HybridTransform, StepsAreReportedInOrder) {
  std::vector<int> steps;
  TransformOptions opt;
  opt.mode = CollapseMode::Hier;
  opt.on_step = [&](int s, const KernelIR&) { steps.push_back(s); };
  hybrid_transform(corpus_kernel("reduce4"), opt);
  EXPECT_EQ(steps, (std::vector<int>{0, 1, 2, 3, 4, 5, 6}));
}

TEST(WrapRegions, WarpSumHasTheNestedLoopShape) {
  MpmdProgram p = transform(corpus_kernel("warp_sum"), CollapseMode::Hier);
  EXPECT_EQ(blocks_named(p.ir, "inter_warp_cond"), 1);
  EXPECT_GE(blocks_named(p.ir, "intra_warp_cond"), 3);
  EXPECT_EQ(barrier_count(p.ir), 0);
  int warp_peels = 0;
  for (const auto& b : p.ir.cfg.blocks) {
    if (b.term.kind != TermKind::CondBr || b.term.peel == PeelLevel::None) continue;
    EXPECT_EQ(b.term.peel, PeelLevel::Warp);
    EXPECT_EQ(b.warp_region, -1);
    EXPECT_GE(b.block_region, 0);
    ++warp_peels;
  }
  EXPECT_GE(warp_peels, 2);
  EXPECT_TRUE(verify_program(p).empty());
}

TEST(WrapRegions, SequentialBlockBarriersGiveSequentialNests) {
  MpmdProgram p = transform(parse_module(R"(
__global__ void k(global i32* a) {
  i32 x = a[threadIdx.x];
  __syncthreads();
  a[threadIdx.x] = x + 1;
  __syncthreads();
  a[threadIdx.x] = a[threadIdx.x] * 2;
})").kernels.at(0), CollapseMode::Hier);
  EXPECT_EQ(blocks_named(p.ir, "inter_warp_cond"), 3);
  EXPECT_EQ(p.block_regions.size(), 3U);
  EXPECT_EQ(barrier_count(p.ir), 0);
}

TEST(Replication, WarpSumLocalsAndFlagsAreWarpArrays) {
  MpmdProgram p = transform(corpus_kernel("warp_sum"), CollapseMode::Hier);
  const ReplicatedLocal* val = replicated(p, "val");
  ASSERT_NE(val, nullptr);
  EXPECT_EQ(val->extent, Replication::Warp);
  int flags = 0;
  for (const auto& r : p.replicated) {
    if (r.name.rfind("__flag", 0) == 0) {
      EXPECT_EQ(r.extent, Replication::Warp);
      ++flags;
    }
  }
  EXPECT_GE(flags, 2);
}

TEST(Replication, LocalsCrossingBlockBarriersSpanTheBlock) {
  MpmdProgram p = transform(corpus_kernel("barrier_in_if"), CollapseMode::Hier);
  const ReplicatedLocal* x = replicated(p, "x");
  ASSERT_NE(x, nullptr);
  EXPECT_EQ(x->extent, Replication::Block);
}

TEST(Replication, RegionPrivateTemporaryStaysScalar) {
  MpmdProgram p = transform(corpus_kernel("vecadd"), CollapseMode::Hier);
  EXPECT_EQ(replicated(p, "i"), nullptr);
  EXPECT_NE(p.ir.find_local("i"), nullptr);
}

TEST(Specialize, SingleWarpBlockDropsTheInterWarpLoop) {
  const KernelDef k = corpus_kernel("reduce4");
  MpmdProgram normal = transform(k, CollapseMode::Hier);
  MpmdProgram spec = specialize(normal, 32, 4);
  EXPECT_TRUE(spec.specialized);
  EXPECT_EQ(spec.block_size, 32);
  EXPECT_GT(blocks_named(normal.ir, "inter_warp_cond"), 0);
  EXPECT_EQ(blocks_named(spec.ir, "inter_warp_cond"), 0);
  EXPECT_LT(spec.ir.cfg.size(), normal.ir.cfg.size());

  testing::CorpusCase c = testing::load_case_at("reduce4", 32);
  const Workload& w = c.launches.at(0);
  LaunchConfig config = w.config;
  config.specialize = true;
  DiffReport r = diff_run(k, spec, config, w.memory, w.args);
  EXPECT_TRUE(r.equal) << r.text();
}

TEST(Specialize, IsIdempotent) {
  for (const auto& name : testing::corpus_names()) {
    for (const auto& k : parse_module_file((testing::corpus_dir() / (name + ".spk")).string()).kernels) {
      SCOPED_TRACE(k.name);
      MpmdProgram once = specialize(transform(k, CollapseMode::Auto), 64, 4);
      MpmdProgram twice = specialize(once, 64, 4);
      EXPECT_EQ(dump_text(twice.ir), dump_text(once.ir));
    }
  }
}

TEST(Specialize, FoldsLaunchDimensions) {
  MpmdProgram p = specialize(transform(corpus_kernel("vecadd"), CollapseMode::Flat), 64, 4);
  const std::string text = dump_text(p.ir);
  EXPECT_EQ(text.find("blockDim.x"), std::string::npos);
  EXPECT_EQ(text.find("gridDim.x"), std::string::npos);
}

TEST(VerifyProgram, CorpusTransformsCleanlyInEveryMode) {
  for (const auto& name : testing::corpus_names()) {
    for (const auto& k : parse_module_file((testing::corpus_dir() / (name + ".spk")).string()).kernels) {
      SCOPED_TRACE(k.name);
      MpmdProgram hier = transform(k, CollapseMode::Hier);
      EXPECT_TRUE(verify_program(hier).empty());
      EXPECT_EQ(barrier_count(hier.ir), 0);
      if (!uses_warp_features(canonical_ir(k))) {
        EXPECT_TRUE(verify_program(transform(k, CollapseMode::Flat)).empty());
      }
    }
  }
}

}  // namespace
}  // namespace collapse
