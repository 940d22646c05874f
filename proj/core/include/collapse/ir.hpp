#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "collapse/ast.hpp"

namespace collapse {

enum class BarrierLevel : std::uint8_t { Warp, Block };
enum class BarrierOrigin : std::uint8_t { Source, RawHazard, WarHazard, Extra };
enum class LaneBufferKind : std::uint8_t { Vote, Shfl };

std::string_view to_string(BarrierLevel level);
std::string_view to_string(BarrierOrigin origin);

enum class InstrKind : std::uint8_t {
  Assign,     // target = value; target is Var, Index or LocalElem
  LaneStore,  // warp_vote/warp_shfl[lane] = value
  Barrier,
};

/// How an instruction is reported in execution traces.
enum class TraceRole : std::uint8_t {
  Plain,  // "i<id>"
  Store,  // "i<id>.store": lane-buffer write of a lowered collective
  Load,   // "i<id>.load": lane-buffer read of a lowered collective
  Flag,   // "t<id>.flag": hoisted branch condition
};

struct Instr {
  InstrKind kind = InstrKind::Assign;
  int id = -1;  // source instruction id; -1 for synthesized code
  TraceRole role = TraceRole::Plain;

  ExprPtr target;
  ExprPtr value;

  LaneBufferKind buffer = LaneBufferKind::Vote;

  BarrierLevel level = BarrierLevel::Block;
  BarrierOrigin origin = BarrierOrigin::Source;

  static Instr assign(ExprPtr target, ExprPtr value, int id = -1);
  static Instr lane_store(LaneBufferKind buffer, ExprPtr value, int id);
  static Instr barrier(BarrierLevel level, BarrierOrigin origin);
};

enum class TermKind : std::uint8_t { Br, CondBr, Ret };
enum class PeelLevel : std::uint8_t { None, Warp, Block };

struct Terminator {
  TermKind kind = TermKind::Ret;
  int id = -1;  // source branch id for CondBr; -1 otherwise
  ExprPtr cond;
  int target = -1;       // Br target, CondBr true target
  int else_target = -1;  // CondBr false target
  PeelLevel peel = PeelLevel::None;

  static Terminator br(int target);
  static Terminator cond_br(ExprPtr cond, int if_true, int if_false, int id = -1);
  static Terminator ret();
};

struct BasicBlock {
  int id = -1;
  std::string name;
  std::vector<Instr> instrs;
  Terminator term;
  /// Set on blocks whose branch controls a region containing barriers.
  bool guards_barrier = false;
  BarrierLevel guard_level = BarrierLevel::Warp;
  /// Region membership recorded by loop wrapping; -1 when outside.
  int warp_region = -1;
  int block_region = -1;

  bool has_barrier() const;
  /// Highest barrier level among the block's instructions; -1 if none.
  int max_barrier_level() const;
  bool ends_with_barrier() const;
};

/// Control-flow graph. `blocks[i].id == i` always holds.
struct Cfg {
  std::vector<BasicBlock> blocks;
  int entry = -1;
  int exit = -1;

  int add_block(std::string name);
  std::size_t size() const { return blocks.size(); }
  BasicBlock& operator[](int id) { return blocks[static_cast<std::size_t>(id)]; }
  const BasicBlock& operator[](int id) const { return blocks[static_cast<std::size_t>(id)]; }

  std::vector<int> successors(int block) const;
  std::vector<std::vector<int>> predecessors() const;
  /// Drops blocks unreachable from entry and renumbers the rest in original order.
  void compact();
  /// Rewrites every edge `from -> old_target` to `from -> new_target`.
  static void retarget(Terminator& term, int old_target, int new_target);
};

enum class Replication : std::uint8_t { Scalar, Warp, Block };

struct LocalInfo {
  std::string name;
  ScalarKind type = ScalarKind::I32;
  Replication replication = Replication::Scalar;
};

struct SharedInfo {
  std::string name;
  ScalarKind type = ScalarKind::I32;
  int length = 0;
};

enum class CollapseMode : std::uint8_t { Flat, Hier, Auto };
std::string_view to_string(CollapseMode mode);

/// A kernel as a CFG plus its symbol tables.
struct KernelIR {
  std::string name;
  std::vector<Param> params;
  std::vector<SharedInfo> shared;
  std::vector<LocalInfo> locals;
  Cfg cfg;
  int next_id = 0;   // next free source instruction id
  int next_tmp = 0;  // counter for synthesized names

  const LocalInfo* find_local(const std::string& name) const;
  LocalInfo* find_local(const std::string& name);
  const SharedInfo* find_shared(const std::string& name) const;
  const Param* find_param(const std::string& name) const;
  /// Adds a fresh synthesized local `__<stem><n>`.
  std::string fresh_local(const std::string& stem, ScalarKind type);
  /// Adds `name` to the locals table if absent.
  void ensure_local(const std::string& name, ScalarKind type);
};

// Expression helpers over the IR.
namespace irx {

/// Rebuilds `e` bottom-up, replacing every node for which `fn` returns non-null.
ExprPtr rewrite(const ExprPtr& e, const std::function<ExprPtr(const ExprPtr&)>& fn);
/// Visits every node of `e` in pre-order.
void visit(const ExprPtr& e, const std::function<void(const Expr&)>& fn);
bool contains_kind(const ExprPtr& e, ExprKind kind);
/// Visits every expression tree referenced by an instruction or terminator.
void for_each_expr(const Instr& in, const std::function<void(const ExprPtr&)>& fn);
void for_each_expr(const Terminator& t, const std::function<void(const ExprPtr&)>& fn);

}  // namespace irx

}  // namespace collapse
