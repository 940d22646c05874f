#include "collapse/ast.hpp"

#include <cstring>

namespace collapse {

std::string_view to_string(ScalarKind kind) { return kind == ScalarKind::I32 ? "i32" : "f32"; }

namespace ex {

namespace {
std::shared_ptr<Expr> make(ExprKind kind, ScalarKind type) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->type = type;
  return e;
}
}  // namespace

ExprPtr int_lit(std::int32_t value) {
  auto e = make(ExprKind::IntLit, ScalarKind::I32);
  e->int_value = value;
  return e;
}

ExprPtr float_lit(float value) {
  auto e = make(ExprKind::FloatLit, ScalarKind::F32);
  e->float_value = value;
  return e;
}

ExprPtr var(std::string name, ScalarKind type) {
  auto e = make(ExprKind::Var, type);
  e->name = std::move(name);
  return e;
}

ExprPtr index(std::string buffer, ScalarKind elem, ExprPtr idx) {
  auto e = make(ExprKind::Index, elem);
  e->name = std::move(buffer);
  e->operands.push_back(std::move(idx));
  return e;
}

ExprPtr builtin(Builtin which) {
  auto e = make(ExprKind::Builtin, ScalarKind::I32);
  e->builtin = which;
  return e;
}

ExprPtr unary(UnaryOp op, ExprPtr operand) {
  ScalarKind type = op == UnaryOp::Neg ? operand->type : ScalarKind::I32;
  auto e = make(ExprKind::Unary, type);
  e->unary = op;
  e->operands.push_back(std::move(operand));
  return e;
}

ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
  auto e = make(ExprKind::Binary, binary_result_type(op, lhs->type, rhs->type));
  e->binary = op;
  e->operands.push_back(std::move(lhs));
  e->operands.push_back(std::move(rhs));
  return e;
}

ExprPtr cast(ScalarKind to, ExprPtr operand) {
  auto e = make(ExprKind::Cast, to);
  e->operands.push_back(std::move(operand));
  return e;
}

ExprPtr collective(CollectiveKind kind, std::vector<ExprPtr> args, bool explicit_mask) {
  ScalarKind type = kind == CollectiveKind::ShflDown ? args.at(0)->type : ScalarKind::I32;
  auto e = make(ExprKind::Collective, type);
  e->collective = kind;
  e->explicit_mask = explicit_mask;
  e->operands = std::move(args);
  return e;
}

ExprPtr local_elem(std::string name, ScalarKind type, ExprPtr idx) {
  auto e = make(ExprKind::LocalElem, type);
  e->name = std::move(name);
  e->operands.push_back(std::move(idx));
  return e;
}

ExprPtr lane_shfl(ScalarKind type, ExprPtr offset) {
  auto e = make(ExprKind::LaneShfl, type);
  e->operands.push_back(std::move(offset));
  return e;
}

ExprPtr lane_vote(CollectiveKind kind) {
  auto e = make(ExprKind::LaneVote, ScalarKind::I32);
  e->collective = kind;
  return e;
}

}  // namespace ex

ScalarKind binary_result_type(BinaryOp op, ScalarKind lhs, ScalarKind rhs) {
  switch (op) {
    case BinaryOp::Add:
    case BinaryOp::Sub:
    case BinaryOp::Mul:
    case BinaryOp::Div:
      return (lhs == ScalarKind::F32 || rhs == ScalarKind::F32) ? ScalarKind::F32 : ScalarKind::I32;
    default:
      return ScalarKind::I32;
  }
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return structurally_equal(*a, *b);
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.type != b.type || a.operands.size() != b.operands.size()) return false;
  switch (a.kind) {
    case ExprKind::IntLit:
      if (a.int_value != b.int_value) return false;
      break;
    case ExprKind::FloatLit:
      if (std::memcmp(&a.float_value, &b.float_value, sizeof(float)) != 0) return false;
      break;
    case ExprKind::Var:
    case ExprKind::Index:
    case ExprKind::LocalElem:
      if (a.name != b.name) return false;
      break;
    case ExprKind::Builtin:
      if (a.builtin != b.builtin) return false;
      break;
    case ExprKind::Unary:
      if (a.unary != b.unary) return false;
      break;
    case ExprKind::Binary:
      if (a.binary != b.binary) return false;
      break;
    case ExprKind::Collective:
      if (a.collective != b.collective || a.explicit_mask != b.explicit_mask) return false;
      break;
    case ExprKind::LaneVote:
      if (a.collective != b.collective) return false;
      break;
    case ExprKind::Cast:
    case ExprKind::LaneShfl:
      break;
  }
  for (std::size_t i = 0; i < a.operands.size(); ++i) {
    if (!structurally_equal(a.operands[i], b.operands[i])) return false;
  }
  return true;
}

namespace {

bool equal_stmt(const StmtPtr& a, const StmtPtr& b);

bool equal_block(const StmtBlock& a, const StmtBlock& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!equal_stmt(a[i], b[i])) return false;
  }
  return true;
}

bool equal_stmt(const StmtPtr& a, const StmtPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case StmtKind::Assign:
      return a->assign_op == b->assign_op && structurally_equal(a->target, b->target) &&
             structurally_equal(a->value, b->value);
    case StmtKind::DeclLocal:
      return a->name == b->name && a->decl_type == b->decl_type && structurally_equal(a->value, b->value);
    case StmtKind::DeclShared:
      return a->name == b->name && a->decl_type == b->decl_type && a->shared_length == b->shared_length;
    case StmtKind::If:
      return structurally_equal(a->value, b->value) && a->has_else == b->has_else &&
             equal_block(a->then_body, b->then_body) && equal_block(a->else_body, b->else_body);
    case StmtKind::For:
      return equal_stmt(a->for_init, b->for_init) && structurally_equal(a->value, b->value) &&
             equal_stmt(a->for_step, b->for_step) && equal_block(a->body, b->body);
    case StmtKind::Block:
      return equal_block(a->body, b->body);
    case StmtKind::SyncThreads:
    case StmtKind::SyncWarp:
    case StmtKind::Return:
      return true;
  }
  return false;
}

}  // namespace

bool structurally_equal(const KernelModule& a, const KernelModule& b) {
  if (a.kernels.size() != b.kernels.size()) return false;
  for (std::size_t k = 0; k < a.kernels.size(); ++k) {
    const auto& ka = a.kernels[k];
    const auto& kb = b.kernels[k];
    if (ka.name != kb.name || ka.params.size() != kb.params.size()) return false;
    for (std::size_t p = 0; p < ka.params.size(); ++p) {
      if (ka.params[p].name != kb.params[p].name ||
          ka.params[p].type.is_buffer != kb.params[p].type.is_buffer ||
          ka.params[p].type.elem != kb.params[p].type.elem) {
        return false;
      }
    }
    if (!equal_block(ka.body, kb.body)) return false;
  }
  return true;
}

const KernelDef* KernelModule::find(std::string_view name) const {
  for (const auto& k : kernels) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

}  // namespace collapse
