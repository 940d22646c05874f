#include <algorithm>
#include <set>

#include "collapse/transform.hpp"

namespace collapse {

bool ParallelRegion::contains(int b) const { return std::binary_search(blocks.begin(), blocks.end(), b); }

bool is_peel_block(const BasicBlock& b) {
  return b.term.kind == TermKind::CondBr && b.term.peel != PeelLevel::None && b.instrs.empty();
}

void split_at_barriers(Cfg& cfg) {
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    auto& instrs = cfg.blocks[i].instrs;
    auto it = std::find_if(instrs.begin(), instrs.end(), [](const Instr& in) { return in.kind == InstrKind::Barrier; });
    if (it == instrs.end()) continue;
    bool last = std::next(it) == instrs.end();
    if (last && cfg.blocks[i].term.kind != TermKind::CondBr) continue;

    std::vector<Instr> rest(std::next(it), instrs.end());
    instrs.erase(std::next(it), instrs.end());
    Terminator term = cfg.blocks[i].term;
    std::string name = cfg.blocks[i].name;
    bool is_exit = cfg.exit == static_cast<int>(i);
    int n = cfg.add_block(name + ".s");
    BasicBlock& tail = cfg[n];
    tail.instrs = std::move(rest);
    tail.term = term;
    tail.guards_barrier = cfg.blocks[i].guards_barrier;
    tail.guard_level = cfg.blocks[i].guard_level;
    cfg.blocks[i].guards_barrier = false;
    cfg.blocks[i].term = Terminator::br(n);
    if (is_exit) cfg.exit = n;
  }
}

std::vector<ParallelRegion> find_parallel_regions(const Cfg& cfg, BarrierLevel level, const DomTrees& trees) {
  auto preds = cfg.predecessors();
  auto is_tail = [&](int b) {
    const BasicBlock& bb = cfg[b];
    if (!bb.ends_with_barrier()) return false;
    return level == BarrierLevel::Warp || bb.instrs.back().level == BarrierLevel::Block;
  };

  std::vector<ParallelRegion> regions;
  for (const auto& b : cfg.blocks) {
    if (!trees.reachable(b.id) || !is_tail(b.id)) continue;
    std::set<int> members{b.id};
    std::vector<int> work(preds[static_cast<std::size_t>(b.id)].begin(), preds[static_cast<std::size_t>(b.id)].end());
    while (!work.empty()) {
      int p = work.back();
      work.pop_back();
      if (members.count(p) || is_tail(p) || !trees.postdominates(b.id, p)) continue;
      if (is_peel_block(cfg[p]) && (level == BarrierLevel::Warp || cfg[p].term.peel == PeelLevel::Block)) continue;
      members.insert(p);
      for (int q : preds[static_cast<std::size_t>(p)]) work.push_back(q);
    }
    // Regions of barrier-only and empty blocks hold no code.
    bool code = std::any_of(members.begin(), members.end(), [&](int m) {
      const BasicBlock& mb = cfg[m];
      return mb.term.kind == TermKind::CondBr ||
             std::any_of(mb.instrs.begin(), mb.instrs.end(), [](const Instr& in) { return in.kind != InstrKind::Barrier; });
    });
    if (!code) continue;
    ParallelRegion r;
    r.level = level;
    r.tail = b.id;
    r.blocks.assign(members.begin(), members.end());
    regions.push_back(std::move(r));
  }
  return regions;
}

void erase_barriers(Cfg& cfg, BarrierLevel level) {
  for (auto& b : cfg.blocks) {
    std::erase_if(b.instrs, [&](const Instr& in) { return in.kind == InstrKind::Barrier && in.level == level; });
  }
}

namespace {

struct LoopShape {
  const char* prefix;
  const char* iv;
  BarrierLevel level;
};

LoopShape shape_of(LoopKind kind) {
  switch (kind) {
    case LoopKind::IntraWarp: return {"intra_warp", "__tx", BarrierLevel::Warp};
    case LoopKind::InterWarp: return {"inter_warp", "__wid", BarrierLevel::Block};
    case LoopKind::Flat: return {"flat", "__tx", BarrierLevel::Block};
  }
  return {"?", "?", BarrierLevel::Block};
}

ExprPtr trip_count(LoopKind kind, int warp_size) {
  switch (kind) {
    case LoopKind::IntraWarp: return ex::int_lit(warp_size);
    case LoopKind::InterWarp: return ex::binary(BinaryOp::Div, ex::builtin(Builtin::BlockDim), ex::int_lit(warp_size));
    case LoopKind::Flat: return ex::builtin(Builtin::BlockDim);
  }
  return ex::int_lit(1);
}

}  // namespace

void wrap_regions(KernelIR& ir, const std::vector<ParallelRegion>& regions, const WrapOptions& options) {
  Cfg& cfg = ir.cfg;
  const LoopShape shape = shape_of(options.kind);
  ExprPtr iv = ex::var(shape.iv, ScalarKind::I32);
  ir.ensure_local(shape.iv, ScalarKind::I32);
  DomTrees trees = compute_domtrees(cfg);

  for (std::size_t r = 0; r < regions.size(); ++r) {
    const ParallelRegion& region = regions[r];
    auto preds = cfg.predecessors();
    std::vector<int> entries;
    for (int b : region.blocks) {
      const auto& ps = preds[static_cast<std::size_t>(b)];
      bool external = ps.empty() || std::any_of(ps.begin(), ps.end(), [&](int p) { return !region.contains(p); });
      if (external) entries.push_back(b);
    }
    if (entries.size() != 1 && !(options.tolerate_multi_entry && !entries.empty())) {
      throw TransformError(TransformErrorKind::Structure,
                           "parallel region ending at " + cfg[region.tail].name + " has " +
                               std::to_string(entries.size()) + " entry blocks");
    }
    std::sort(entries.begin(), entries.end(), [&](int a, int b) {
      return trees.rpo_index[static_cast<std::size_t>(a)] < trees.rpo_index[static_cast<std::size_t>(b)];
    });
    const int entry = entries.front();

    for (int b : region.blocks) {
      if (options.kind == LoopKind::IntraWarp) {
        cfg[b].warp_region = static_cast<int>(r);
      } else {
        cfg[b].block_region = static_cast<int>(r);
      }
    }

    const std::string p = shape.prefix;
    int init = cfg.add_block(p + "_init");
    int inc = cfg.add_block(p + "_inc");
    int cond = cfg.add_block(p + "_cond");
    int end = cfg.add_block(p + "_end");

    cfg[init].instrs.push_back(Instr::assign(iv, ex::int_lit(0)));
    cfg[init].term = Terminator::br(entry);
    for (int q : preds[static_cast<std::size_t>(entry)]) {
      if (!region.contains(q)) Cfg::retarget(cfg[q].term, entry, init);
    }
    if (cfg.entry == entry) cfg.entry = init;

    BasicBlock& tail = cfg[region.tail];
    Instr bar = tail.instrs.back();
    tail.instrs.pop_back();
    Terminator old = tail.term;
    tail.term = Terminator::br(inc);
    cfg[inc].instrs.push_back(Instr::assign(iv, ex::binary(BinaryOp::Add, iv, ex::int_lit(1))));
    cfg[inc].term = Terminator::br(cond);
    cfg[cond].term = Terminator::cond_br(ex::binary(BinaryOp::Lt, iv, trip_count(options.kind, options.warp_size)),
                                         entry, end);
    if (bar.level > shape.level) cfg[end].instrs.push_back(bar);
    cfg[end].term = old;
    if (cfg.exit == region.tail) cfg.exit = end;
  }
  erase_barriers(cfg, shape.level);
  if (shape.level == BarrierLevel::Block) erase_barriers(cfg, BarrierLevel::Warp);
}

}  // namespace collapse
