#include <gtest/gtest.h>

#include "collapse/dump.hpp"
#include "collapse/parser.hpp"
#include "collapse/transform.hpp"
#include "corpus.hpp"

namespace collapse {
namespace {

KernelIR lowered(const std::string& src, bool skip_raw = false, bool skip_war = false) {
  KernelIR ir = canonical_ir(parse_module(src).kernels.at(0));
  lower_collectives(ir, skip_raw, skip_war);
  return ir;
}

// Instructions of every block in id order, flattened to a tag sequence.
std::vector<std::string> shape(const KernelIR& ir) {
  std::vector<std::string> out;
  for (const auto& b : ir.cfg.blocks) {
    for (const auto& in : b.instrs) {
      if (in.kind == InstrKind::LaneStore) {
        out.push_back("store");
      } else if (in.kind == InstrKind::Barrier) {
        out.push_back(std::string("sync.") + std::string(to_string(in.origin)));
      } else if (irx::contains_kind(in.value, ExprKind::LaneVote) || irx::contains_kind(in.value, ExprKind::LaneShfl)) {
        out.push_back("read");
      }
    }
  }
  return out;
}

TEST(LowerCollectives, VoteBecomesStoreSyncReduceSync) {
  KernelIR ir = lowered(
      "__global__ void k(global i32* a) { i32 r = vote_all(a[threadIdx.x] > 0); a[threadIdx.x] = r; }");
  const std::vector<std::string> expected{"store", "sync.raw", "read", "sync.war"};
  EXPECT_EQ(shape(ir), expected);
  for (const auto& b : ir.cfg.blocks) {
    for (const auto& in : b.instrs) {
      if (in.kind == InstrKind::Barrier) EXPECT_EQ(in.level, BarrierLevel::Warp);
      if (in.kind == InstrKind::LaneStore) EXPECT_EQ(in.buffer, LaneBufferKind::Vote);
    }
  }
  EXPECT_TRUE(verify_lowering(ir).empty());
}

TEST(LowerCollectives, ConsecutiveVotesYieldFourWarpBarriers) {
  KernelIR ir = lowered(R"(
__global__ void k(global i32* in, global i32* out) {
  i32 a = vote_all(in[threadIdx.x] > 0);
  i32 b = vote_any(in[threadIdx.x] > 10);
  out[threadIdx.x] = a * 2 + b;
})");
  const std::vector<std::string> expected{"store", "sync.raw", "read", "sync.war",
                                          "store", "sync.raw", "read", "sync.war"};
  EXPECT_EQ(shape(ir), expected);
}

TEST(LowerCollectives, ShuffleUsesTheShuffleBuffer) {
  KernelIR ir = lowered("__global__ void k(global f32* a) { a[threadIdx.x] = shfl_down(a[threadIdx.x], 1); }");
  bool store = false;
  for (const auto& b : ir.cfg.blocks) {
    for (const auto& in : b.instrs) {
      if (in.kind == InstrKind::LaneStore) {
        store = true;
        EXPECT_EQ(in.buffer, LaneBufferKind::Shfl);
        EXPECT_EQ(in.value->type, ScalarKind::F32);
      }
    }
  }
  EXPECT_TRUE(store);
}

TEST(LowerCollectives, KernelWithoutCollectivesIsUnchanged) {
  KernelIR ir = canonical_ir(
      parse_module("__global__ void k(global i32* a) { a[threadIdx.x] = threadIdx.x * 2; }").kernels.at(0));
  const std::string before = dump_text(ir);
  lower_collectives(ir);
  EXPECT_EQ(dump_text(ir), before);
}

TEST(LowerCollectives, SkippingAHazardBarrierIsDetected) {
  const char* src = "__global__ void k(global i32* a) { a[threadIdx.x] = vote_any(a[threadIdx.x] > 0); }";
  EXPECT_FALSE(verify_lowering(lowered(src, true, false)).empty());
  EXPECT_FALSE(verify_lowering(lowered(src, false, true)).empty());
}

TEST(LowerCollectives, CorpusPassesTheStructuralScan) {
  for (const auto& name : testing::corpus_names()) {
    for (const auto& k : parse_module_file((testing::corpus_dir() / (name + ".spk")).string()).kernels) {
      KernelIR ir = canonical_ir(k);
      lower_collectives(ir);
      auto problems = verify_lowering(ir);
      EXPECT_TRUE(problems.empty()) << k.name << ": " << (problems.empty() ? "" : problems.front());
    }
  }
}

TEST(ReduceVote, AllAndAny) {
  std::vector<std::uint32_t> lanes(32, 1);
  EXPECT_EQ(reduce_vote(lanes, CollectiveKind::VoteAll), 1);
  EXPECT_EQ(reduce_vote(lanes, CollectiveKind::VoteAny), 1);
  lanes[31] = 0;
  EXPECT_EQ(reduce_vote(lanes, CollectiveKind::VoteAll), 0);
  std::fill(lanes.begin(), lanes.end(), 0);
  EXPECT_EQ(reduce_vote(lanes, CollectiveKind::VoteAny), 0);
}

TEST(ReduceVote, SingleSetLaneAgainstBruteForce) {
  for (int lane = 0; lane < 32; ++lane) {
    std::vector<std::uint32_t> lanes(32, 0);
    lanes[static_cast<std::size_t>(lane)] = 1;
    EXPECT_EQ(reduce_vote(lanes, CollectiveKind::VoteAny), 1);
    EXPECT_EQ(reduce_vote(lanes, CollectiveKind::VoteAll), 0);
  }
  // Every predicate pattern of a 4-lane warp.
  for (unsigned mask = 0; mask < 16; ++mask) {
    std::vector<std::uint32_t> lanes(4);
    for (unsigned i = 0; i < 4; ++i) lanes[i] = (mask >> i) & 1U ? 7U : 0U;
    EXPECT_EQ(reduce_vote(lanes, CollectiveKind::VoteAny), mask != 0 ? 1 : 0);
    EXPECT_EQ(reduce_vote(lanes, CollectiveKind::VoteAll), mask == 15 ? 1 : 0);
  }
}

TEST(ShuffleDown, ReadsHigherLanesAndClampsAtTheEdge) {
  std::vector<std::uint32_t> lanes(32);
  for (std::uint32_t i = 0; i < 32; ++i) lanes[i] = i;
  EXPECT_EQ(shuffle_down(lanes, 0, 16, 32), 16U);
  for (int lane = 0; lane < 32; ++lane) {
    EXPECT_EQ(shuffle_down(lanes, lane, 0, 32), static_cast<std::uint32_t>(lane));
    const std::uint32_t want = lane + 3 < 32 ? static_cast<std::uint32_t>(lane + 3) : static_cast<std::uint32_t>(lane);
    EXPECT_EQ(shuffle_down(lanes, lane, 3, 32), want);
  }
  EXPECT_EQ(shuffle_down(lanes, 31, 1, 32), 31U);
}

}  // namespace
}  // namespace collapse
