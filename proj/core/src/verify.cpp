#include <algorithm>
#include <map>
#include <set>

#include "collapse/transform.hpp"

namespace collapse {

namespace {

std::string label(const BasicBlock& b) { return b.name + "." + std::to_string(b.id); }

bool barrier_at(const BasicBlock& b, bool at_end, BarrierLevel level) {
  if (b.instrs.empty()) return false;
  const Instr& in = at_end ? b.instrs.back() : b.instrs.front();
  return in.kind == InstrKind::Barrier && in.level >= level;
}

bool may_be_orphan(const BasicBlock& b) {
  if (b.term.kind == TermKind::CondBr) return false;
  return std::all_of(b.instrs.begin(), b.instrs.end(), [](const Instr& in) { return in.kind == InstrKind::Barrier; });
}

}  // namespace

std::vector<std::string> verify_lowering(const KernelIR& ir) {
  std::vector<std::string> out;
  for (const auto& b : ir.cfg.blocks) {
    const auto& v = b.instrs;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i].kind == InstrKind::Assign && v[i].value && irx::contains_kind(v[i].value, ExprKind::Collective)) {
        out.push_back(label(b) + ": collective left unlowered");
      }
      if (v[i].kind != InstrKind::LaneStore) continue;
      bool ok = i + 3 < v.size() && v[i + 1].kind == InstrKind::Barrier && v[i + 1].level == BarrierLevel::Warp &&
           v[i + 1].origin == BarrierOrigin::RawHazard && v[i + 2].kind == InstrKind::Assign &&
           v[i + 2].role == TraceRole::Load && v[i + 2].id == v[i].id && v[i + 3].kind == InstrKind::Barrier &&
           v[i + 3].level == BarrierLevel::Warp && v[i + 3].origin == BarrierOrigin::WarHazard;
      if (!ok) out.push_back(label(b) + ": lane-buffer write of i" + std::to_string(v[i].id) + " is not fenced");
    }
  }
  return out;
}

std::vector<std::string> verify_fencing(const Cfg& cfg) {
  std::vector<std::string> out;
  DomTrees trees = compute_domtrees(cfg);
  auto preds = cfg.predecessors();
  if (!barrier_at(cfg[cfg.entry], false, BarrierLevel::Block)) out.push_back("entry does not begin with a barrier");
  if (!barrier_at(cfg[cfg.exit], true, BarrierLevel::Block)) out.push_back("exit does not end with a barrier");

  for (const auto& b : cfg.blocks) {
    int lvl = b.max_barrier_level();
    if (lvl < 0 || !trees.reachable(b.id) || trees.postdominates(b.id, cfg.entry)) continue;
    auto level = static_cast<BarrierLevel>(lvl);
    int head = trees.idom[static_cast<std::size_t>(b.id)];
    while (head >= 0 && trees.postdominates(b.id, head)) head = trees.idom[static_cast<std::size_t>(head)];
    int exit = b.id;
    while (exit >= 0 && trees.dominates(b.id, exit)) exit = trees.ipdom[static_cast<std::size_t>(exit)];
    if (head < 0 || exit < 0) continue;
    if (!barrier_at(cfg[head], true, level)) out.push_back(label(cfg[head]) + ": if-head not fenced for " + label(b));
    if (!barrier_at(cfg[exit], false, level)) out.push_back(label(cfg[exit]) + ": if-exit not fenced for " + label(b));
    for (int p : preds[static_cast<std::size_t>(exit)]) {
      if (p != head && trees.dominates(head, p) && !barrier_at(cfg[p], true, level)) {
        out.push_back(label(cfg[p]) + ": if-body end not fenced for " + label(b));
      }
    }
  }

  for (const auto& loop : find_loops(cfg, trees)) {
    int lvl = -1;
    for (int b : loop.body) lvl = std::max(lvl, cfg[b].max_barrier_level());
    if (lvl < 0) continue;
    auto level = static_cast<BarrierLevel>(lvl);
    const std::string h = label(cfg[loop.header]);
    for (int latch : loop.latches) {
      if (!barrier_at(cfg[latch], true, level)) out.push_back(h + ": loop latch not fenced");
    }
    if (!barrier_at(cfg[loop.header], false, level)) out.push_back(h + ": loop header not fenced");
    for (int e : loop.exits) {
      if (!barrier_at(cfg[e], false, level)) out.push_back(h + ": loop exit " + label(cfg[e]) + " not fenced");
    }
  }
  return out;
}

std::vector<std::string> verify_regions(const Cfg& cfg, const std::vector<ParallelRegion>& warp,
                                        const std::vector<ParallelRegion>& block) {
  std::vector<std::string> out;
  DomTrees trees = compute_domtrees(cfg);
  auto preds = cfg.predecessors();

  auto check_level = [&](const std::vector<ParallelRegion>& regions, BarrierLevel level) {
    const std::string lv(to_string(level));
    std::map<int, int> count;
    for (const auto& r : regions) {
      for (int b : r.blocks) ++count[b];
      int terminating = 0;
      for (int b : r.blocks) {
        if (barrier_at(cfg[b], true, level) && (level == BarrierLevel::Warp || cfg[b].instrs.back().level == level)) {
          ++terminating;
        }
      }
      if (terminating != 1 || !barrier_at(cfg[r.tail], true, level)) {
        out.push_back(lv + " region at " + label(cfg[r.tail]) + " has " + std::to_string(terminating) +
                      " terminating barriers");
      }
      // Weak connectivity.
      std::set<int> seen{r.blocks.front()};
      std::vector<int> work{r.blocks.front()};
      while (!work.empty()) {
        int b = work.back();
        work.pop_back();
        std::vector<int> nbrs = cfg.successors(b);
        nbrs.insert(nbrs.end(), preds[static_cast<std::size_t>(b)].begin(), preds[static_cast<std::size_t>(b)].end());
        for (int n : nbrs) {
          if (r.contains(n) && seen.insert(n).second) work.push_back(n);
        }
      }
      if (seen.size() != r.blocks.size()) out.push_back(lv + " region at " + label(cfg[r.tail]) + " is disconnected");
    }
    for (const auto& b : cfg.blocks) {
      if (!trees.reachable(b.id)) continue;
      int c = count.count(b.id) ? count[b.id] : 0;
      bool excluded = is_peel_block(b) && (level == BarrierLevel::Warp || b.term.peel == PeelLevel::Block);
      if (excluded) {
        if (c != 0) out.push_back(label(b) + ": peel block inside a " + lv + " region");
      } else if (c > 1) {
        out.push_back(label(b) + ": in " + std::to_string(c) + " " + lv + " regions");
      } else if (c == 0 && !may_be_orphan(b)) {
        out.push_back(label(b) + ": in no " + lv + " region");
      }
    }
  };
  check_level(warp, BarrierLevel::Warp);
  check_level(block, BarrierLevel::Block);

  for (const auto& w : warp) {
    int parents = 0;
    for (const auto& bl : block) {
      if (std::all_of(w.blocks.begin(), w.blocks.end(), [&](int b) { return bl.contains(b); })) ++parents;
    }
    if (parents != 1) {
      out.push_back("warp region at " + label(cfg[w.tail]) + " is inside " + std::to_string(parents) +
                    " block regions");
    }
  }
  return out;
}

std::vector<std::string> verify_program(const MpmdProgram& program) {
  std::vector<std::string> out;
  const bool hier = program.mode == CollapseMode::Hier;
  for (const auto& b : program.ir.cfg.blocks) {
    for (const auto& in : b.instrs) {
      if (in.kind == InstrKind::Barrier) out.push_back(label(b) + ": barrier left after wrapping");
    }
    bool source = std::any_of(b.instrs.begin(), b.instrs.end(), [](const Instr& in) { return in.id >= 0; });
    if (source) {
      if (b.block_region < 0 || (hier && b.warp_region < 0)) {
        out.push_back(label(b) + ": source instructions outside the thread loops");
      }
    }
    if (is_peel_block(b)) {
      bool inside = b.block_region >= 0;
      bool want = hier && b.term.peel == PeelLevel::Warp;
      if (inside != want || b.warp_region >= 0) out.push_back(label(b) + ": peel block placed inside the wrong loops");
    }
  }
  return out;
}

}  // namespace collapse
