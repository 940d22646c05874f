#include <map>

#include "collapse/cfg.hpp"

namespace collapse {

namespace {

class Builder {
 public:
  explicit Builder(KernelIR& ir) : ir_(ir) {}

  void build(const KernelDef& def) {
    Cfg& cfg = ir_.cfg;
    int entry = cfg.add_block("entry");
    int exit = cfg.add_block("exit");
    cfg.entry = entry;
    cfg.exit = exit;
    int body = cfg.add_block("body");
    cfg[entry].term = Terminator::br(body);
    cfg[exit].term = Terminator::ret();
    scopes_.emplace_back();
    int end = lower_block(def.body, body);
    cfg[end].term = Terminator::br(exit);
    scopes_.pop_back();
  }

 private:
  Cfg& cfg() { return ir_.cfg; }

  std::string resolve(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    return name;
  }

  std::string declare_local(const std::string& name, ScalarKind type) {
    std::string ir_name = name;
    int n = 0;
    while (ir_.find_local(ir_name) != nullptr) ir_name = name + "." + std::to_string(++n);
    ir_.locals.push_back({ir_name, type, Replication::Scalar});
    scopes_.back()[name] = ir_name;
    return ir_name;
  }

  // Renames locals to their IR names and hoists collectives into temporaries
  // appended to `block`, innermost first.
  ExprPtr lower_expr(const ExprPtr& e, int block) {
    return irx::rewrite(e, [&](const ExprPtr& x) -> ExprPtr {
      if (x->kind == ExprKind::Var) {
        if (ir_.find_param(x->name) != nullptr) return nullptr;
        std::string n = resolve(x->name);
        if (n == x->name) return nullptr;
        return ex::var(n, x->type);
      }
      if (x->kind == ExprKind::Collective) {
        std::string tmp = ir_.fresh_local("ct", x->type);
        cfg()[block].instrs.push_back(Instr::assign(ex::var(tmp, x->type), x, ir_.next_id++));
        return ex::var(tmp, x->type);
      }
      return nullptr;
    });
  }

  static BinaryOp compound_op(AssignOp op) {
    switch (op) {
      case AssignOp::Add: return BinaryOp::Add;
      case AssignOp::Sub: return BinaryOp::Sub;
      case AssignOp::Mul: return BinaryOp::Mul;
      case AssignOp::Div: return BinaryOp::Div;
      case AssignOp::Rem: return BinaryOp::Rem;
      case AssignOp::Shl: return BinaryOp::Shl;
      case AssignOp::Shr: return BinaryOp::Shr;
      case AssignOp::And: return BinaryOp::BitAnd;
      case AssignOp::Or: return BinaryOp::BitOr;
      case AssignOp::Xor: return BinaryOp::BitXor;
      case AssignOp::Set: break;
    }
    return BinaryOp::Add;
  }

  static ExprPtr convert(ExprPtr value, ScalarKind to) {
    if (value->type == to) return value;
    return ex::cast(to, std::move(value));
  }

  void lower_assign(const Stmt& s, int block) {
    ExprPtr target = lower_expr(s.target, block);
    ExprPtr value = lower_expr(s.value, block);
    if (s.assign_op != AssignOp::Set) value = ex::binary(compound_op(s.assign_op), target, value);
    value = convert(value, target->type);
    cfg()[block].instrs.push_back(Instr::assign(target, value, ir_.next_id++));
  }

  void lower_decl(const Stmt& s, int block) {
    ExprPtr value = s.value ? lower_expr(s.value, block)
                            : (s.decl_type == ScalarKind::I32 ? ex::int_lit(0) : ex::float_lit(0.0F));
    std::string n = declare_local(s.name, s.decl_type);
    cfg()[block].instrs.push_back(
        Instr::assign(ex::var(n, s.decl_type), convert(value, s.decl_type), ir_.next_id++));
  }

  int lower_block(const StmtBlock& body, int cur) {
    for (const auto& s : body) cur = lower_stmt(*s, cur);
    return cur;
  }

  int lower_scoped(const StmtBlock& body, int cur) {
    scopes_.emplace_back();
    cur = lower_block(body, cur);
    scopes_.pop_back();
    return cur;
  }

  int lower_stmt(const Stmt& s, int cur) {
    switch (s.kind) {
      case StmtKind::Assign:
        lower_assign(s, cur);
        return cur;
      case StmtKind::DeclLocal:
        lower_decl(s, cur);
        return cur;
      case StmtKind::DeclShared:
        ir_.shared.push_back({s.name, s.decl_type, s.shared_length});
        return cur;
      case StmtKind::SyncThreads:
        cfg()[cur].instrs.push_back(Instr::barrier(BarrierLevel::Block, BarrierOrigin::Source));
        return cur;
      case StmtKind::SyncWarp:
        cfg()[cur].instrs.push_back(Instr::barrier(BarrierLevel::Warp, BarrierOrigin::Source));
        return cur;
      case StmtKind::Return: {
        cfg()[cur].term = Terminator::br(cfg().exit);
        return cfg().add_block("dead");
      }
      case StmtKind::Block:
        return lower_scoped(s.body, cur);
      case StmtKind::If:
        return lower_if(s, cur);
      case StmtKind::For:
        return lower_for(s, cur);
    }
    return cur;
  }

  int lower_if(const Stmt& s, int cur) {
    ExprPtr cond = lower_expr(s.value, cur);
    int merge = cfg().add_block("if.end");
    int then_target = merge;
    int else_target = merge;
    if (!s.then_body.empty()) {
      then_target = cfg().add_block("if.then");
      int end = lower_scoped(s.then_body, then_target);
      cfg()[end].term = Terminator::br(merge);
    }
    if (s.has_else && !s.else_body.empty()) {
      else_target = cfg().add_block("if.else");
      int end = lower_scoped(s.else_body, else_target);
      cfg()[end].term = Terminator::br(merge);
    }
    cfg()[cur].term = Terminator::cond_br(cond, then_target, else_target, ir_.next_id++);
    return merge;
  }

  // Rotated loop behind a guard:
  //   cur:       init; br cond ? for.ph : for.end
  //   for.ph:    br for.body
  //   for.body:  ...; br for.latch
  //   for.latch: step; br cond ? for.body : for.exit
  //   for.exit:  br for.end
  int lower_for(const Stmt& s, int cur) {
    scopes_.emplace_back();
    if (s.for_init) lower_stmt(*s.for_init, cur);
    ExprPtr guard_cond = lower_expr(s.value, cur);
    int ph = cfg().add_block("for.ph");
    int body = cfg().add_block("for.body");
    int end_block = cfg().add_block("for.end");
    cfg()[cur].term = Terminator::cond_br(guard_cond, ph, end_block, ir_.next_id++);
    cfg()[ph].term = Terminator::br(body);

    int body_end = lower_scoped(s.body, body);
    int latch = cfg().add_block("for.latch");
    cfg()[body_end].term = Terminator::br(latch);
    if (s.for_step) lower_stmt(*s.for_step, latch);
    ExprPtr latch_cond = lower_expr(s.value, latch);
    int exit = cfg().add_block("for.exit");
    cfg()[latch].term = Terminator::cond_br(latch_cond, body, exit, ir_.next_id++);
    cfg()[exit].term = Terminator::br(end_block);
    scopes_.pop_back();
    return end_block;
  }

  KernelIR& ir_;
  std::vector<std::map<std::string, std::string>> scopes_;
};

}  // namespace

KernelIR build_cfg(const KernelDef& kernel) {
  KernelIR ir;
  ir.name = kernel.name;
  ir.params = kernel.params;
  Builder(ir).build(kernel);
  return ir;
}

}  // namespace collapse
