#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "collapse/ir.hpp"
#include "collapse/scalar.hpp"
#include "collapse/transform.hpp"

namespace collapse::detail {

enum class Op : std::uint8_t {
  Const,
  Reg,       // a = register slot
  RegArr,    // a = 0 warp / 1 block extent, b = array ordinal, c0 = index
  Param,     // a = parameter index (scalar)
  Global,    // a = parameter index (buffer), c0 = index
  Shared,    // a = shared array, c0 = index
  BlockIdx,
  BlockDim,
  GridDim,
  Unary,
  Binary,
  Cast,
  LogAnd,
  LogOr,
  LaneShfl,  // c0 = offset
  LaneVote,  // a = CollectiveKind
};

struct Node {
  Op op = Op::Const;
  ScalarKind type = ScalarKind::I32;
  ScalarKind t0 = ScalarKind::I32;
  ScalarKind t1 = ScalarKind::I32;
  std::uint8_t sub = 0;  // UnaryOp / BinaryOp
  std::int32_t a = 0;
  std::int32_t b = 0;
  Bits k = 0;
  int c0 = -1;
  int c1 = -1;
};

enum class Store : std::uint8_t { Reg, RegArr, Global, Shared, LaneVote, LaneShfl };

struct CInstr {
  Store kind = Store::Reg;
  std::int32_t a = 0;
  std::int32_t b = 0;
  int index = -1;
  int value = -1;
  int trace = -1;
};

struct CBlock {
  std::vector<CInstr> instrs;
  TermKind term = TermKind::Ret;
  int cond = -1;
  int target = -1;
  int else_target = -1;
  int trace = -1;
};

struct CompiledCode {
  std::vector<Node> nodes;
  std::vector<CBlock> blocks;
  int entry = 0;
  int warp_size = 32;
  int tx_slot = -1;
  std::size_t scalar_slots = 0;
  std::size_t warp_arrays = 0;
  std::size_t block_arrays = 0;
  std::vector<std::size_t> shared_base;
  std::vector<int> shared_length;
  std::size_t shared_cells = 0;
  std::vector<std::string> trace_keys;
  std::vector<std::string> buffer_names;  // by parameter index
  std::vector<std::string> shared_names;
  std::string kernel;
};

CompiledCode compile(const KernelIR& ir, const std::vector<ReplicatedLocal>& replicated, int warp_size);

/// Trace key of an instruction or terminator; empty when untraced.
std::string trace_key(const Instr& in);
std::string trace_key(const Terminator& t);

}  // namespace collapse::detail
