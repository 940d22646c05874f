#include <algorithm>

#include "collapse/cfg.hpp"

namespace collapse {

namespace {

void simplify_branches(Cfg& cfg) {
  for (auto& b : cfg.blocks) {
    if (b.term.kind == TermKind::CondBr && b.term.target == b.term.else_target) {
      b.term = Terminator::br(b.term.target);
    }
  }
}

void unify_returns(Cfg& cfg) {
  std::vector<int> rets;
  for (const auto& b : cfg.blocks) {
    if (b.term.kind == TermKind::Ret) rets.push_back(b.id);
  }
  if (rets.empty()) throw TransformError(TransformErrorKind::Structure, "kernel has no reachable return");
  if (rets.size() == 1) {
    cfg.exit = rets.front();
  } else {
    int x = cfg.add_block("unified.exit");
    cfg[x].term = Terminator::ret();
    for (int r : rets) cfg[r].term = Terminator::br(x);
    cfg.exit = x;
  }
  auto preds = cfg.predecessors();
  if (preds[static_cast<std::size_t>(cfg.exit)].size() > 1) {
    int m = cfg.add_block("unified.return");
    for (int p : preds[static_cast<std::size_t>(cfg.exit)]) Cfg::retarget(cfg[p].term, cfg.exit, m);
    cfg[m].term = Terminator::br(cfg.exit);
  }
}

void isolate_entry(Cfg& cfg) {
  auto preds = cfg.predecessors();
  if (preds[static_cast<std::size_t>(cfg.entry)].empty()) return;
  int e = cfg.add_block("entry.new");
  cfg[e].term = Terminator::br(cfg.entry);
  cfg.entry = e;
}

// Applies at most one loop fix; returns whether the CFG changed.
bool fix_one_loop(Cfg& cfg) {
  DomTrees trees = compute_domtrees(cfg);
  auto loops = find_loops(cfg, trees);
  auto preds = cfg.predecessors();
  for (const auto& l : loops) {
    const std::string& hname = cfg[l.header].name;
    if (l.latches.size() > 1) {
      int latch = cfg.add_block(hname + ".latch");
      for (int src : l.latches) Cfg::retarget(cfg[src].term, l.header, latch);
      cfg[latch].term = Terminator::br(l.header);
      return true;
    }
    if (l.preheader < 0) {
      int ph = cfg.add_block(hname + ".ph");
      for (int p : preds[static_cast<std::size_t>(l.header)]) {
        if (!l.body.count(p)) Cfg::retarget(cfg[p].term, l.header, ph);
      }
      cfg[ph].term = Terminator::br(l.header);
      return true;
    }
    for (int e : l.exits) {
      const auto& eps = preds[static_cast<std::size_t>(e)];
      bool dedicated = std::all_of(eps.begin(), eps.end(), [&](int p) { return l.body.count(p) > 0; });
      if (dedicated) continue;
      int d = cfg.add_block("loop.exit");
      for (int p : eps) {
        if (l.body.count(p)) Cfg::retarget(cfg[p].term, e, d);
      }
      cfg[d].term = Terminator::br(e);
      return true;
    }
  }
  return false;
}

}  // namespace

void canonicalize(Cfg& cfg) {
  cfg.compact();
  simplify_branches(cfg);
  isolate_entry(cfg);
  unify_returns(cfg);
  while (fix_one_loop(cfg)) {
  }
  cfg.compact();
}

std::vector<std::string> check_canonical(const Cfg& cfg) {
  std::vector<std::string> out;
  auto said = [&](const BasicBlock& b, const std::string& what) {
    out.push_back("block " + std::to_string(b.id) + " (" + b.name + "): " + what);
  };
  if (cfg.entry < 0 || cfg.exit < 0) {
    out.push_back("missing entry or exit");
    return out;
  }
  auto preds = cfg.predecessors();
  DomTrees trees = compute_domtrees(cfg);
  if (!preds[static_cast<std::size_t>(cfg.entry)].empty()) out.push_back("entry block has predecessors");
  if (cfg.exit != cfg.entry && preds[static_cast<std::size_t>(cfg.exit)].size() > 1) {
    out.push_back("exit block has more than one predecessor");
  }
  for (const auto& b : cfg.blocks) {
    if (b.id != static_cast<int>(&b - cfg.blocks.data())) said(b, "id does not match position");
    if (!trees.reachable(b.id)) said(b, "unreachable");
    if (b.term.kind == TermKind::Ret && b.id != cfg.exit) said(b, "return outside the exit block");
    if (b.term.kind == TermKind::CondBr && b.term.target == b.term.else_target) said(b, "branch with identical targets");
    for (int s : cfg.successors(b.id)) {
      if (s < 0 || s >= static_cast<int>(cfg.size())) said(b, "successor out of range");
    }
  }
  if (cfg[cfg.exit].term.kind != TermKind::Ret) out.push_back("exit block does not return");

  std::vector<LoopInfo> loops;
  try {
    loops = find_loops(cfg, trees);
  } catch (const TransformError& e) {
    out.emplace_back(e.what());
    return out;
  }
  for (const auto& l : loops) {
    const BasicBlock& h = cfg[l.header];
    if (l.latches.size() != 1) said(h, "loop has " + std::to_string(l.latches.size()) + " latches");
    if (l.preheader < 0) said(h, "loop has no preheader");
    for (int e : l.exits) {
      if (!trees.dominates(l.header, e)) said(h, "loop header does not dominate exit " + cfg[e].name);
      for (int p : preds[static_cast<std::size_t>(e)]) {
        if (!l.body.count(p)) said(h, "loop exit " + cfg[e].name + " is not dedicated");
      }
    }
  }
  return out;
}

}  // namespace collapse
