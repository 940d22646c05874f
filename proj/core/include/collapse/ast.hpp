#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "collapse/error.hpp"

namespace collapse {

enum class ScalarKind : std::uint8_t { I32, F32 };

std::string_view to_string(ScalarKind kind);

enum class Builtin : std::uint8_t { ThreadIdx, BlockIdx, BlockDim, GridDim };

enum class UnaryOp : std::uint8_t { Neg, Not, BitNot };

enum class BinaryOp : std::uint8_t {
  Add, Sub, Mul, Div, Rem,
  Shl, Shr, BitAnd, BitOr, BitXor,
  Lt, Le, Gt, Ge, Eq, Ne,
  LogAnd, LogOr,
};

enum class CollectiveKind : std::uint8_t { ShflDown, VoteAll, VoteAny };

enum class ExprKind : std::uint8_t {
  IntLit,
  FloatLit,
  Var,         // local or scalar parameter
  Index,       // buffer[operand0], global or shared
  Builtin,
  Unary,
  Binary,
  Cast,        // (type) operand0
  Collective,  // warp collective over operands
  // Forms that only appear after transformation.
  LocalElem,   // replicated local `name[operand0]`
  LaneShfl,    // read the warp_shfl lane buffer at (lane + operand0)
  LaneVote,    // reduce the warp_vote lane buffer
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression node. Every node carries its static result type.
struct Expr {
  ExprKind kind = ExprKind::IntLit;
  ScalarKind type = ScalarKind::I32;
  std::int32_t int_value = 0;
  float float_value = 0.0F;
  std::string name;
  Builtin builtin = Builtin::ThreadIdx;
  UnaryOp unary = UnaryOp::Neg;
  BinaryOp binary = BinaryOp::Add;
  CollectiveKind collective = CollectiveKind::ShflDown;
  bool explicit_mask = false;
  std::vector<ExprPtr> operands;
};

namespace ex {
ExprPtr int_lit(std::int32_t value);
ExprPtr float_lit(float value);
ExprPtr var(std::string name, ScalarKind type);
ExprPtr index(std::string buffer, ScalarKind elem, ExprPtr idx);
ExprPtr builtin(Builtin which);
ExprPtr unary(UnaryOp op, ExprPtr operand);
ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr cast(ScalarKind to, ExprPtr operand);
ExprPtr collective(CollectiveKind kind, std::vector<ExprPtr> args, bool explicit_mask);
ExprPtr local_elem(std::string name, ScalarKind type, ExprPtr idx);
ExprPtr lane_shfl(ScalarKind type, ExprPtr offset);
ExprPtr lane_vote(CollectiveKind kind);
}  // namespace ex

/// Result type of a binary operator applied to the given operand types.
ScalarKind binary_result_type(BinaryOp op, ScalarKind lhs, ScalarKind rhs);

bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

enum class AssignOp : std::uint8_t { Set, Add, Sub, Mul, Div, Rem, Shl, Shr, And, Or, Xor };

enum class StmtKind : std::uint8_t {
  Assign,
  DeclLocal,
  DeclShared,
  If,
  For,
  Block,
  SyncThreads,
  SyncWarp,
  Return,
};

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;
using StmtBlock = std::vector<StmtPtr>;

struct Stmt {
  StmtKind kind = StmtKind::Return;
  SourceLoc loc;

  // Assign: target is a Var or Index expression.
  ExprPtr target;
  AssignOp assign_op = AssignOp::Set;
  // Assign value, DeclLocal initializer (nullable), If/For condition.
  ExprPtr value;

  // DeclLocal / DeclShared.
  std::string name;
  ScalarKind decl_type = ScalarKind::I32;
  int shared_length = 0;

  // If: then_body / else_body. For / Block: body.
  StmtBlock then_body;
  StmtBlock else_body;
  bool has_else = false;
  StmtPtr for_init;  // DeclLocal or Assign, nullable
  StmtPtr for_step;  // Assign, nullable
  StmtBlock body;
};

struct ParamType {
  bool is_buffer = false;
  ScalarKind elem = ScalarKind::I32;
};

struct Param {
  std::string name;
  ParamType type;
};

struct KernelDef {
  std::string name;
  std::vector<Param> params;
  StmtBlock body;
  SourceLoc loc;
};

struct KernelModule {
  std::vector<KernelDef> kernels;

  const KernelDef* find(std::string_view name) const;
};

bool structurally_equal(const KernelModule& a, const KernelModule& b);

}  // namespace collapse
