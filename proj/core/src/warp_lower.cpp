#include "collapse/transform.hpp"

namespace collapse {

void lower_collectives(KernelIR& ir, bool skip_raw, bool skip_war) {
  for (auto& b : ir.cfg.blocks) {
    std::vector<Instr> out;
    out.reserve(b.instrs.size());
    for (auto& in : b.instrs) {
      if (in.kind != InstrKind::Assign || in.value->kind != ExprKind::Collective) {
        out.push_back(std::move(in));
        continue;
      }
      const Expr& c = *in.value;
      Instr load;
      if (c.collective == CollectiveKind::ShflDown) {
        out.push_back(Instr::lane_store(LaneBufferKind::Shfl, c.operands[0], in.id));
        load = Instr::assign(in.target, ex::lane_shfl(c.type, c.operands[1]), in.id);
      } else {
        ExprPtr pred = c.operands[0];
        if (pred->type == ScalarKind::F32) pred = ex::binary(BinaryOp::Ne, pred, ex::float_lit(0.0F));
        out.push_back(Instr::lane_store(LaneBufferKind::Vote, pred, in.id));
        load = Instr::assign(in.target, ex::lane_vote(c.collective), in.id);
      }
      load.role = TraceRole::Load;
      if (!skip_raw) out.push_back(Instr::barrier(BarrierLevel::Warp, BarrierOrigin::RawHazard));
      out.push_back(std::move(load));
      if (!skip_war) out.push_back(Instr::barrier(BarrierLevel::Warp, BarrierOrigin::WarHazard));
    }
    b.instrs = std::move(out);
  }
}

std::int32_t reduce_vote(std::span<const std::uint32_t> lanes, CollectiveKind kind) {
  if (kind == CollectiveKind::VoteAll) {
    for (std::uint32_t v : lanes) {
      if (v == 0) return 0;
    }
    return 1;
  }
  for (std::uint32_t v : lanes) {
    if (v != 0) return 1;
  }
  return 0;
}

std::uint32_t shuffle_down(std::span<const std::uint32_t> buffer, int lane, std::int32_t offset, int width) {
  std::int64_t src = static_cast<std::int64_t>(lane) + offset;
  if (src >= 0 && src < width) return buffer[static_cast<std::size_t>(src)];
  return buffer[static_cast<std::size_t>(lane)];
}

}  // namespace collapse
