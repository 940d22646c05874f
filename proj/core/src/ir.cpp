#include "collapse/ir.hpp"

#include <deque>

namespace collapse {

std::string_view to_string(BarrierLevel level) { return level == BarrierLevel::Warp ? "warp" : "block"; }

std::string_view to_string(BarrierOrigin origin) {
  switch (origin) {
    case BarrierOrigin::Source: return "source";
    case BarrierOrigin::RawHazard: return "raw";
    case BarrierOrigin::WarHazard: return "war";
    case BarrierOrigin::Extra: return "extra";
  }
  return "?";
}

std::string_view to_string(CollapseMode mode) {
  switch (mode) {
    case CollapseMode::Flat: return "flat";
    case CollapseMode::Hier: return "hier";
    case CollapseMode::Auto: return "auto";
  }
  return "?";
}

Instr Instr::assign(ExprPtr target, ExprPtr value, int id) {
  Instr in;
  in.kind = InstrKind::Assign;
  in.id = id;
  in.target = std::move(target);
  in.value = std::move(value);
  return in;
}

Instr Instr::lane_store(LaneBufferKind buffer, ExprPtr value, int id) {
  Instr in;
  in.kind = InstrKind::LaneStore;
  in.id = id;
  in.role = TraceRole::Store;
  in.buffer = buffer;
  in.value = std::move(value);
  return in;
}

Instr Instr::barrier(BarrierLevel level, BarrierOrigin origin) {
  Instr in;
  in.kind = InstrKind::Barrier;
  in.level = level;
  in.origin = origin;
  return in;
}

Terminator Terminator::br(int target) {
  Terminator t;
  t.kind = TermKind::Br;
  t.target = target;
  return t;
}

Terminator Terminator::cond_br(ExprPtr cond, int if_true, int if_false, int id) {
  Terminator t;
  t.kind = TermKind::CondBr;
  t.cond = std::move(cond);
  t.target = if_true;
  t.else_target = if_false;
  t.id = id;
  return t;
}

Terminator Terminator::ret() { return Terminator{}; }

bool BasicBlock::has_barrier() const {
  for (const auto& in : instrs) {
    if (in.kind == InstrKind::Barrier) return true;
  }
  return false;
}

int BasicBlock::max_barrier_level() const {
  int level = -1;
  for (const auto& in : instrs) {
    if (in.kind == InstrKind::Barrier) level = std::max(level, static_cast<int>(in.level));
  }
  return level;
}

bool BasicBlock::ends_with_barrier() const {
  return !instrs.empty() && instrs.back().kind == InstrKind::Barrier;
}

int Cfg::add_block(std::string name) {
  BasicBlock b;
  b.id = static_cast<int>(blocks.size());
  b.name = std::move(name);
  blocks.push_back(std::move(b));
  return blocks.back().id;
}

std::vector<int> Cfg::successors(int block) const {
  const Terminator& t = (*this)[block].term;
  switch (t.kind) {
    case TermKind::Br: return {t.target};
    case TermKind::CondBr:
      if (t.target == t.else_target) return {t.target};
      return {t.target, t.else_target};
    case TermKind::Ret: return {};
  }
  return {};
}

std::vector<std::vector<int>> Cfg::predecessors() const {
  std::vector<std::vector<int>> preds(blocks.size());
  for (const auto& b : blocks) {
    for (int s : successors(b.id)) preds[static_cast<std::size_t>(s)].push_back(b.id);
  }
  return preds;
}

void Cfg::retarget(Terminator& term, int old_target, int new_target) {
  if (term.kind == TermKind::Ret) return;
  if (term.target == old_target) term.target = new_target;
  if (term.kind == TermKind::CondBr && term.else_target == old_target) term.else_target = new_target;
}

void Cfg::compact() {
  std::vector<int> remap(blocks.size(), -1);
  std::vector<bool> seen(blocks.size(), false);
  std::deque<int> work{entry};
  seen[static_cast<std::size_t>(entry)] = true;
  while (!work.empty()) {
    int b = work.front();
    work.pop_front();
    for (int s : successors(b)) {
      if (!seen[static_cast<std::size_t>(s)]) {
        seen[static_cast<std::size_t>(s)] = true;
        work.push_back(s);
      }
    }
  }
  std::vector<BasicBlock> kept;
  for (auto& b : blocks) {
    if (seen[static_cast<std::size_t>(b.id)]) {
      remap[static_cast<std::size_t>(b.id)] = static_cast<int>(kept.size());
      kept.push_back(std::move(b));
    }
  }
  for (auto& b : kept) {
    b.id = remap[static_cast<std::size_t>(b.id)];
    if (b.term.kind != TermKind::Ret) {
      b.term.target = remap[static_cast<std::size_t>(b.term.target)];
      if (b.term.kind == TermKind::CondBr) b.term.else_target = remap[static_cast<std::size_t>(b.term.else_target)];
    }
  }
  blocks = std::move(kept);
  entry = remap[static_cast<std::size_t>(entry)];
  exit = exit >= 0 ? remap[static_cast<std::size_t>(exit)] : -1;
}

const LocalInfo* KernelIR::find_local(const std::string& n) const {
  for (const auto& l : locals) {
    if (l.name == n) return &l;
  }
  return nullptr;
}

LocalInfo* KernelIR::find_local(const std::string& n) {
  for (auto& l : locals) {
    if (l.name == n) return &l;
  }
  return nullptr;
}

const SharedInfo* KernelIR::find_shared(const std::string& n) const {
  for (const auto& s : shared) {
    if (s.name == n) return &s;
  }
  return nullptr;
}

const Param* KernelIR::find_param(const std::string& n) const {
  for (const auto& p : params) {
    if (p.name == n) return &p;
  }
  return nullptr;
}

std::string KernelIR::fresh_local(const std::string& stem, ScalarKind type) {
  std::string n = "__" + stem + std::to_string(next_tmp++);
  locals.push_back({n, type, Replication::Scalar});
  return n;
}

void KernelIR::ensure_local(const std::string& n, ScalarKind type) {
  if (find_local(n) == nullptr) locals.push_back({n, type, Replication::Scalar});
}

namespace irx {

ExprPtr rewrite(const ExprPtr& e, const std::function<ExprPtr(const ExprPtr&)>& fn) {
  if (!e) return e;
  std::vector<ExprPtr> ops;
  bool changed = false;
  ops.reserve(e->operands.size());
  for (const auto& op : e->operands) {
    ExprPtr r = rewrite(op, fn);
    changed = changed || r != op;
    ops.push_back(std::move(r));
  }
  ExprPtr base = e;
  if (changed) {
    auto copy = std::make_shared<Expr>(*e);
    copy->operands = std::move(ops);
    base = copy;
  }
  ExprPtr replaced = fn(base);
  return replaced ? replaced : base;
}

void visit(const ExprPtr& e, const std::function<void(const Expr&)>& fn) {
  if (!e) return;
  fn(*e);
  for (const auto& op : e->operands) visit(op, fn);
}

bool contains_kind(const ExprPtr& e, ExprKind kind) {
  bool found = false;
  visit(e, [&](const Expr& x) { found = found || x.kind == kind; });
  return found;
}

void for_each_expr(const Instr& in, const std::function<void(const ExprPtr&)>& fn) {
  if (in.target) fn(in.target);
  if (in.value) fn(in.value);
}

void for_each_expr(const Terminator& t, const std::function<void(const ExprPtr&)>& fn) {
  if (t.cond) fn(t.cond);
}

}  // namespace irx

}  // namespace collapse
