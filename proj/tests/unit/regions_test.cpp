#include <gtest/gtest.h>

#include <algorithm>

#include "collapse/dump.hpp"
#include "collapse/parser.hpp"
#include "collapse/transform.hpp"
#include "corpus.hpp"

namespace collapse {
namespace {

// The CFG right after splitting at barriers.
KernelIR split_ir(const KernelDef& k, int warp_size = 32) {
  KernelIR out;
  TransformOptions opt;
  opt.mode = CollapseMode::Hier;
  opt.warp_size = warp_size;
  opt.on_step = [&](int step, const KernelIR& ir) {
    if (step == 3) out = ir;
  };
  hybrid_transform(k, opt);
  return out;
}

KernelIR split_ir(const std::string& src) { return split_ir(parse_module(src).kernels.at(0)); }

bool subset(const ParallelRegion& inner, const ParallelRegion& outer) {
  return std::includes(outer.blocks.begin(), outer.blocks.end(), inner.blocks.begin(), inner.blocks.end());
}

TEST(SplitAtBarriers, MidBlockBarrierSplitsInTwo) {
  Cfg cfg;
  int b = cfg.add_block("b");
  cfg.entry = cfg.exit = b;
  auto x = ex::var("x", ScalarKind::I32);
  cfg[b].instrs = {Instr::assign(x, ex::int_lit(1), 0), Instr::barrier(BarrierLevel::Block, BarrierOrigin::Source),
                   Instr::assign(x, ex::int_lit(2), 1)};
  cfg[b].term = Terminator::ret();
  split_at_barriers(cfg);
  ASSERT_EQ(cfg.size(), 2U);
  EXPECT_TRUE(cfg[0].ends_with_barrier());
  EXPECT_EQ(cfg[0].term.kind, TermKind::Br);
  EXPECT_EQ(cfg[1].instrs.size(), 1U);
  EXPECT_EQ(cfg[1].term.kind, TermKind::Ret);
}

TEST(SplitAtBarriers, AlreadySplitBlockIsUnchanged) {
  KernelIR ir = split_ir("__global__ void k(global i32* a) { a[threadIdx.x] = 1; __syncthreads(); a[0] = 2; }");
  const std::string once = dump_text(ir);
  split_at_barriers(ir.cfg);
  EXPECT_EQ(dump_text(ir), once);
  for (const auto& b : ir.cfg.blocks) {
    for (std::size_t i = 0; i + 1 < b.instrs.size(); ++i) EXPECT_NE(b.instrs[i].kind, InstrKind::Barrier);
    if (b.ends_with_barrier()) EXPECT_NE(b.term.kind, TermKind::CondBr);
  }
}

TEST(ParallelRegions, SplitSyncwarpHasTwoWarpRegionsInsideOneBlockRegion) {
  KernelIR ir = split_ir(testing::load_case("split_syncwarp").module.kernels.at(0));
  DomTrees trees = compute_domtrees(ir.cfg);
  auto warp = find_parallel_regions(ir.cfg, BarrierLevel::Warp, trees);
  auto block = find_parallel_regions(ir.cfg, BarrierLevel::Block, trees);
  ASSERT_EQ(warp.size(), 2U);
  ASSERT_EQ(block.size(), 1U);
  for (const auto& w : warp) {
    EXPECT_EQ(w.level, BarrierLevel::Warp);
    EXPECT_TRUE(subset(w, block[0]));
  }
  EXPECT_TRUE(verify_regions(ir.cfg, warp, block).empty());
}

TEST(ParallelRegions, WarpIfGivesThreeWarpRegions) {
  KernelIR ir = split_ir(R"(
__global__ void k(global i32* a) {
  i32 x = a[threadIdx.x];
  if (vote_all(x > 0)) {
    x = x * 2;
    __syncwarp();
    x = x + 1;
  }
  a[threadIdx.x] = x;
})");
  DomTrees trees = compute_domtrees(ir.cfg);
  auto warp = find_parallel_regions(ir.cfg, BarrierLevel::Warp, trees);
  auto block = find_parallel_regions(ir.cfg, BarrierLevel::Block, trees);
  EXPECT_TRUE(verify_regions(ir.cfg, warp, block).empty());
  // Vote staging, the then-branch halves and the join each get their own region.
  EXPECT_GE(warp.size(), 3U);
  EXPECT_EQ(block.size(), 1U);
}

TEST(ParallelRegions, PeelBlocksBelongToNoRegion) {
  KernelIR ir = split_ir(testing::load_case("barrier_in_for").module.kernels.at(0));
  DomTrees trees = compute_domtrees(ir.cfg);
  for (BarrierLevel level : {BarrierLevel::Warp, BarrierLevel::Block}) {
    auto regions = find_parallel_regions(ir.cfg, level, trees);
    int peels = 0;
    for (const auto& b : ir.cfg.blocks) {
      if (!is_peel_block(b)) continue;
      ++peels;
      for (const auto& r : regions) EXPECT_FALSE(r.contains(b.id)) << block_label(b);
    }
    EXPECT_GT(peels, 0);
  }
}

TEST(ParallelRegions, CorpusPartitionAndNesting) {
  for (const auto& name : testing::corpus_names()) {
    for (const auto& k : parse_module_file((testing::corpus_dir() / (name + ".spk")).string()).kernels) {
      SCOPED_TRACE(k.name);
      KernelIR ir = split_ir(k);
      DomTrees trees = compute_domtrees(ir.cfg);
      auto warp = find_parallel_regions(ir.cfg, BarrierLevel::Warp, trees);
      auto block = find_parallel_regions(ir.cfg, BarrierLevel::Block, trees);
      auto problems = verify_regions(ir.cfg, warp, block);
      EXPECT_TRUE(problems.empty()) << (problems.empty() ? "" : problems.front());
      for (const auto& w : warp) {
        int owners = 0;
        for (const auto& b : block) owners += subset(w, b) ? 1 : 0;
        EXPECT_EQ(owners, 1);
      }
      for (const auto& level : {warp, block}) {
        for (std::size_t i = 0; i < level.size(); ++i) {
          EXPECT_TRUE(level[i].contains(level[i].tail));
          for (std::size_t j = i + 1; j < level.size(); ++j) {
            for (int b : level[i].blocks) EXPECT_FALSE(level[j].contains(b));
          }
        }
      }
    }
  }
}

TEST(ParallelRegions, VerifierRejectsOverlap) {
  KernelIR ir = split_ir(testing::load_case("split_syncwarp").module.kernels.at(0));
  DomTrees trees = compute_domtrees(ir.cfg);
  auto warp = find_parallel_regions(ir.cfg, BarrierLevel::Warp, trees);
  auto block = find_parallel_regions(ir.cfg, BarrierLevel::Block, trees);
  ASSERT_EQ(warp.size(), 2U);
  warp[1].blocks.insert(warp[1].blocks.end(), warp[0].blocks.begin(), warp[0].blocks.end());
  std::sort(warp[1].blocks.begin(), warp[1].blocks.end());
  EXPECT_FALSE(verify_regions(ir.cfg, warp, block).empty());
  EXPECT_FALSE(verify_regions(ir.cfg, {}, block).empty());
}

}  // namespace
}  // namespace collapse
