#include <map>
#include <optional>

#include "collapse/scalar.hpp"
#include "collapse/transform.hpp"

namespace collapse {

namespace {

std::optional<Bits> literal(const ExprPtr& e) {
  if (e->kind == ExprKind::IntLit) return from_i32(e->int_value);
  if (e->kind == ExprKind::FloatLit) return from_f32(e->float_value);
  return std::nullopt;
}

ExprPtr make_literal(ScalarKind type, Bits v) {
  return type == ScalarKind::I32 ? ex::int_lit(as_i32(v)) : ex::float_lit(as_f32(v));
}

bool is_int(const ExprPtr& e, std::int32_t v) { return e->kind == ExprKind::IntLit && e->int_value == v; }

// Folds literal subtrees and i32 identities.
ExprPtr fold(const ExprPtr& e, const std::map<std::string, ExprPtr>& subst) {
  return irx::rewrite(e, [&](const ExprPtr& x) -> ExprPtr {
    switch (x->kind) {
      case ExprKind::Var: {
        auto it = subst.find(x->name);
        return it == subst.end() ? nullptr : it->second;
      }
      case ExprKind::Unary: {
        auto v = literal(x->operands[0]);
        if (!v) return nullptr;
        return make_literal(x->type, apply_unary(x->unary, x->operands[0]->type, *v));
      }
      case ExprKind::Cast: {
        auto v = literal(x->operands[0]);
        if (!v) return nullptr;
        return make_literal(x->type, convert(x->operands[0]->type, x->type, *v));
      }
      case ExprKind::Binary: {
        const ExprPtr& a = x->operands[0];
        const ExprPtr& b = x->operands[1];
        auto va = literal(a);
        auto vb = literal(b);
        if (va && vb) return make_literal(x->type, apply_binary(x->binary, a->type, *va, b->type, *vb));
        if (x->type != ScalarKind::I32 || a->type != ScalarKind::I32 || b->type != ScalarKind::I32) return nullptr;
        if (x->binary == BinaryOp::Add) {
          if (is_int(a, 0)) return b;
          if (is_int(b, 0)) return a;
        }
        if (x->binary == BinaryOp::Mul) {
          if (is_int(a, 1)) return b;
          if (is_int(b, 1)) return a;
        }
        return nullptr;
      }
      default:
        return nullptr;
    }
  });
}

bool is_wid_trip_one(const Terminator& t) {
  if (t.kind != TermKind::CondBr) return false;
  const Expr& c = *t.cond;
  return c.kind == ExprKind::Binary && c.binary == BinaryOp::Lt && c.operands[0]->kind == ExprKind::Var &&
         c.operands[0]->name == "__wid" && is_int(c.operands[1], 1);
}

const std::string* flag_of(const ExprPtr& e) {
  if ((e->kind == ExprKind::Var || e->kind == ExprKind::LocalElem) && e->name.rfind("__flag", 0) == 0) return &e->name;
  return nullptr;
}

void fold_all(Cfg& cfg, const std::map<std::string, ExprPtr>& subst) {
  for (auto& b : cfg.blocks) {
    for (auto& in : b.instrs) {
      if (in.value) in.value = fold(in.value, subst);
      if (in.target && in.target->kind != ExprKind::Var) in.target = fold(in.target, subst);
    }
    if (b.term.cond) b.term.cond = fold(b.term.cond, subst);
  }
}

bool merge_chains(Cfg& cfg) {
  auto preds = cfg.predecessors();
  for (auto& a : cfg.blocks) {
    if (a.term.kind != TermKind::Br) continue;
    int bi = a.term.target;
    BasicBlock& b = cfg[bi];
    if (bi == a.id || bi == cfg.entry || preds[static_cast<std::size_t>(bi)].size() != 1) continue;
    if (b.term.peel != PeelLevel::None) continue;
    bool a_source = std::any_of(a.instrs.begin(), a.instrs.end(), [](const Instr& in) { return in.id >= 0; });
    bool b_source = std::any_of(b.instrs.begin(), b.instrs.end(), [](const Instr& in) { return in.id >= 0; });
    bool same = a.warp_region == b.warp_region && a.block_region == b.block_region;
    if (!same && a_source && b_source) continue;
    if (!same && !a_source) {
      a.warp_region = b.warp_region;
      a.block_region = b.block_region;
    }
    for (auto& in : b.instrs) a.instrs.push_back(std::move(in));
    b.instrs.clear();
    a.term = b.term;
    b.term = Terminator::ret();
    if (cfg.exit == bi) cfg.exit = a.id;
    cfg.compact();
    return true;
  }
  return false;
}

}  // namespace

MpmdProgram specialize(const MpmdProgram& program, int block_size, int grid_size) {
  MpmdProgram out = program;
  out.specialized = true;
  out.block_size = block_size;
  out.grid_size = grid_size;
  Cfg& cfg = out.ir.cfg;

  // Launch dimensions become constants.
  for (auto& b : cfg.blocks) {
    auto dims = [&](const ExprPtr& e) {
      return irx::rewrite(e, [&](const ExprPtr& x) -> ExprPtr {
        if (x->kind != ExprKind::Builtin) return nullptr;
        if (x->builtin == Builtin::BlockDim) return ex::int_lit(block_size);
        if (x->builtin == Builtin::GridDim) return ex::int_lit(grid_size);
        return nullptr;
      });
    };
    for (auto& in : b.instrs) {
      if (in.value) in.value = dims(in.value);
      if (in.target) in.target = dims(in.target);
    }
    if (b.term.cond) b.term.cond = dims(b.term.cond);
  }
  fold_all(cfg, {});

  // Inter-warp loops of trip one run their body once with __wid = 0.
  bool single_warp = false;
  for (auto& b : cfg.blocks) {
    if (!is_wid_trip_one(b.term)) continue;
    single_warp = true;
    b.term = Terminator::br(b.term.else_target);
  }
  if (single_warp) {
    for (auto& b : cfg.blocks) {
      std::erase_if(b.instrs, [](const Instr& in) {
        return in.kind == InstrKind::Assign && in.target->kind == ExprKind::Var && in.target->name == "__wid" &&
               in.value->kind != ExprKind::IntLit;
      });
    }
    fold_all(cfg, {{"__wid", ex::int_lit(0)}});
  }

  // Flags that are the same constant on every assignment fold their peels.
  std::map<std::string, std::optional<std::int32_t>> flags;
  for (const auto& b : cfg.blocks) {
    for (const auto& in : b.instrs) {
      if (in.kind != InstrKind::Assign) continue;
      const std::string* f = flag_of(in.target);
      if (f == nullptr) continue;
      auto [it, fresh] = flags.try_emplace(*f, std::nullopt);
      bool constant = in.value->kind == ExprKind::IntLit;
      if (fresh) {
        it->second = constant ? std::optional<std::int32_t>(in.value->int_value) : std::nullopt;
      } else if (!constant || !it->second || *it->second != in.value->int_value) {
        it->second = std::nullopt;
      }
    }
  }
  for (auto& b : cfg.blocks) {
    if (b.term.kind != TermKind::CondBr) continue;
    std::optional<bool> known;
    if (b.term.cond->kind == ExprKind::IntLit) known = b.term.cond->int_value != 0;
    if (const std::string* f = flag_of(b.term.cond)) {
      auto it = flags.find(*f);
      if (it != flags.end() && it->second) known = *it->second != 0;
    }
    if (known) b.term = Terminator::br(*known ? b.term.target : b.term.else_target);
  }

  cfg.compact();
  while (merge_chains(cfg)) {
  }
  return out;
}

}  // namespace collapse
