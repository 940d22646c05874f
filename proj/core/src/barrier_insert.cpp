#include <algorithm>
#include <deque>
#include <set>

#include "collapse/transform.hpp"

namespace collapse {

namespace {

// Places an extra barrier of `level` at `pos` unless the neighbouring
// instruction already is one of at least that level; a weaker extra
// neighbour is upgraded instead.
bool place_barrier(BasicBlock& b, bool at_end, BarrierLevel level) {
  if (!b.instrs.empty()) {
    Instr& near = at_end ? b.instrs.back() : b.instrs.front();
    if (near.kind == InstrKind::Barrier) {
      if (near.level >= level) return false;
      if (near.origin == BarrierOrigin::Extra) {
        near.level = level;
        return true;
      }
    }
  }
  Instr bar = Instr::barrier(level, BarrierOrigin::Extra);
  if (at_end) {
    b.instrs.push_back(bar);
  } else {
    b.instrs.insert(b.instrs.begin(), bar);
  }
  return true;
}

void mark_guard(BasicBlock& b, BarrierLevel level) {
  if (!b.guards_barrier || b.guard_level < level) b.guard_level = level;
  b.guards_barrier = true;
}

int loop_barrier_level(const Cfg& cfg, const LoopInfo& loop) {
  int level = -1;
  for (int b : loop.body) level = std::max(level, cfg[b].max_barrier_level());
  return level;
}

}  // namespace

void insert_boundary_barriers(Cfg& cfg) {
  place_barrier(cfg[cfg.entry], false, BarrierLevel::Block);
  place_barrier(cfg[cfg.exit], true, BarrierLevel::Block);
}

void insert_if_barriers(Cfg& cfg) {
  // Barrier insertion never changes edges, so the trees stay valid throughout.
  DomTrees trees = compute_domtrees(cfg);
  auto preds = cfg.predecessors();
  std::deque<std::pair<int, BarrierLevel>> work;
  auto enqueue_if_conditional = [&](int b) {
    int lvl = cfg[b].max_barrier_level();
    if (lvl >= 0 && !trees.postdominates(b, cfg.entry)) work.emplace_back(b, static_cast<BarrierLevel>(lvl));
  };
  for (const auto& b : cfg.blocks) {
    if (trees.reachable(b.id)) enqueue_if_conditional(b.id);
  }

  std::set<std::pair<int, BarrierLevel>> processed;
  while (!work.empty()) {
    auto [block, level] = work.front();
    work.pop_front();
    if (!processed.insert({block, level}).second) continue;

    // If-head: nearest dominator that `block` does not post-dominate.
    int head = trees.idom[static_cast<std::size_t>(block)];
    while (head >= 0 && trees.postdominates(block, head)) head = trees.idom[static_cast<std::size_t>(head)];
    if (head < 0) continue;
    // If-exit: first post-dominator that `block` does not dominate.
    int exit = block;
    while (exit >= 0 && trees.dominates(block, exit)) exit = trees.ipdom[static_cast<std::size_t>(exit)];
    if (exit < 0) continue;

    place_barrier(cfg[head], true, level);
    mark_guard(cfg[head], level);
    place_barrier(cfg[exit], false, level);
    for (int p : preds[static_cast<std::size_t>(exit)]) {
      if (p == head || !trees.dominates(head, p)) continue;
      place_barrier(cfg[p], true, level);
      enqueue_if_conditional(p);
    }
    enqueue_if_conditional(head);
    enqueue_if_conditional(exit);
  }
}

void insert_for_barriers(Cfg& cfg) {
  DomTrees trees = compute_domtrees(cfg);
  auto loops = find_loops(cfg, trees);
  for (const auto& loop : loops) {
    int lvl = loop_barrier_level(cfg, loop);
    if (lvl < 0) continue;
    auto level = static_cast<BarrierLevel>(lvl);
    for (int latch : loop.latches) {
      place_barrier(cfg[latch], true, level);
      mark_guard(cfg[latch], level);
    }
    place_barrier(cfg[loop.header], false, level);
    for (int e : loop.exits) place_barrier(cfg[e], false, level);
  }
}

void insert_extra_barriers(Cfg& cfg, bool skip_if) {
  if (!skip_if) insert_if_barriers(cfg);
  insert_for_barriers(cfg);
  if (!skip_if) insert_if_barriers(cfg);
}

void purity_split_cond(KernelIR& ir) {
  Cfg& cfg = ir.cfg;
  const auto preds = cfg.predecessors();
  const std::size_t count = cfg.size();
  for (std::size_t i = 0; i < count; ++i) {
    BasicBlock& b = cfg.blocks[i];
    if (!b.guards_barrier || b.term.kind != TermKind::CondBr) continue;
    if (is_peel_block(b)) continue;
    Terminator term = b.term;
    if (term.cond->kind != ExprKind::Var) {
      ExprPtr cond = term.cond;
      if (cond->type == ScalarKind::F32) cond = ex::binary(BinaryOp::Ne, cond, ex::float_lit(0.0F));
      std::string flag = ir.fresh_local("flag", ScalarKind::I32);
      Instr def = Instr::assign(ex::var(flag, ScalarKind::I32), cond, term.id);
      def.role = TraceRole::Flag;
      // A lone barrier at a join fences both the entry and the branch; the
      // flag goes between two copies of it.
      const bool lone = std::all_of(b.instrs.begin(), b.instrs.end(),
                                    [](const Instr& in) { return in.kind == InstrKind::Barrier; });
      if (lone && b.ends_with_barrier() && preds[i].size() > 1) {
        Instr fence = b.instrs.back();
        b.instrs.insert(b.instrs.begin(), fence);
      }
      auto pos = b.instrs.end();
      if (b.ends_with_barrier()) --pos;
      b.instrs.insert(pos, std::move(def));
      term.cond = ex::var(flag, ScalarKind::I32);
    }
    term.peel = b.guard_level == BarrierLevel::Block ? PeelLevel::Block : PeelLevel::Warp;
    BarrierLevel level = b.guard_level;
    std::string name = b.name + ".peel";
    b.guards_barrier = false;
    int peel = cfg.add_block(name);
    // `b` may have been invalidated by add_block.
    cfg[peel].term = term;
    cfg[peel].guards_barrier = true;
    cfg[peel].guard_level = level;
    cfg.blocks[i].term = Terminator::br(peel);
  }
}

}  // namespace collapse
