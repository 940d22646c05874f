#include "collapse/exec.hpp"
#include "compiled_code.hpp"

namespace collapse {

namespace {

using detail::CBlock;
using detail::CInstr;
using detail::CompiledCode;
using detail::Node;
using detail::Op;
using detail::Store;

class Executor {
 public:
  Executor(const CompiledCode& code, BlockContext& ctx, const BoundArgs& args)
      : code_(code),
        ctx_(ctx),
        args_(args),
        block_size_(ctx.config->block_size),
        warp_size_(code.warp_size),
        block_base_(code.scalar_slots + code.warp_arrays * static_cast<std::size_t>(code.warp_size)) {}

  void run() {
    int b = code_.entry;
    const bool tracing = !ctx_.counts.empty();
    for (;;) {
      const CBlock& blk = code_.blocks[static_cast<std::size_t>(b)];
      for (const CInstr& in : blk.instrs) {
        exec(in);
        if (tracing && in.trace >= 0) ++ctx_.counts[static_cast<std::size_t>(in.trace)];
      }
      switch (blk.term) {
        case TermKind::Br:
          b = blk.target;
          break;
        case TermKind::CondBr: {
          const Node& c = node(blk.cond);
          bool taken = truthy(c.type, eval(blk.cond));
          if (tracing && blk.trace >= 0) ++ctx_.counts[static_cast<std::size_t>(blk.trace)];
          b = taken ? blk.target : blk.else_target;
          break;
        }
        case TermKind::Ret:
          return;
      }
    }
  }

 private:
  const Node& node(int i) const { return code_.nodes[static_cast<std::size_t>(i)]; }

  [[noreturn]] void out_of_bounds(const std::string& what, std::int64_t index, std::size_t size) const {
    throw ExecError(ExecErrorKind::OutOfBounds,
                    what + " index " + std::to_string(index) + " out of bounds [0, " + std::to_string(size) +
                        ") in kernel '" + code_.kernel + "' block " + std::to_string(ctx_.block_index));
  }

  std::size_t reg_array_cell(std::int32_t extent, std::int32_t ordinal, std::int32_t index) const {
    const std::size_t len = static_cast<std::size_t>(extent == 0 ? warp_size_ : block_size_);
    if (index < 0 || static_cast<std::size_t>(index) >= len) out_of_bounds("replicated local", index, len);
    std::size_t base = extent == 0 ? code_.scalar_slots + static_cast<std::size_t>(ordinal) * len
                                   : block_base_ + static_cast<std::size_t>(ordinal) * len;
    return base + static_cast<std::size_t>(index);
  }

  Bits& global_cell(std::int32_t param, std::int32_t index) const {
    std::span<Bits> buf = args_.buffers[static_cast<std::size_t>(param)];
    if (index < 0 || static_cast<std::size_t>(index) >= buf.size()) {
      out_of_bounds("buffer '" + code_.buffer_names[static_cast<std::size_t>(param)] + "'", index, buf.size());
    }
    return buf[static_cast<std::size_t>(index)];
  }

  Bits& shared_cell(std::int32_t arr, std::int32_t index) const {
    const auto a = static_cast<std::size_t>(arr);
    const auto len = static_cast<std::size_t>(code_.shared_length[a]);
    if (index < 0 || static_cast<std::size_t>(index) >= len) {
      out_of_bounds("shared array '" + code_.shared_names[a] + "'", index, len);
    }
    return ctx_.shared[code_.shared_base[a] + static_cast<std::size_t>(index)];
  }

  std::int32_t lane() const { return as_i32(ctx_.regs[static_cast<std::size_t>(code_.tx_slot)]); }

  Bits eval(int i) const {
    const Node& n = node(i);
    switch (n.op) {
      case Op::Const: return n.k;
      case Op::Reg: return ctx_.regs[static_cast<std::size_t>(n.a)];
      case Op::RegArr: return ctx_.regs[reg_array_cell(n.a, n.b, as_i32(eval(n.c0)))];
      case Op::Param: return args_.scalars[static_cast<std::size_t>(n.a)];
      case Op::Global: return global_cell(n.a, as_i32(eval(n.c0)));
      case Op::Shared: return shared_cell(n.a, as_i32(eval(n.c0)));
      case Op::BlockIdx: return from_i32(ctx_.block_index);
      case Op::BlockDim: return from_i32(block_size_);
      case Op::GridDim: return from_i32(ctx_.config->grid_size);
      case Op::Unary: return apply_unary(static_cast<UnaryOp>(n.sub), n.t0, eval(n.c0));
      case Op::Binary:
        return apply_binary(static_cast<BinaryOp>(n.sub), n.t0, eval(n.c0), n.t1, eval(n.c1));
      case Op::Cast: return convert(n.t0, n.type, eval(n.c0));
      case Op::LogAnd:
        if (!truthy(n.t0, eval(n.c0))) return 0;
        return truthy(n.t1, eval(n.c1)) ? 1 : 0;
      case Op::LogOr:
        if (truthy(n.t0, eval(n.c0))) return 1;
        return truthy(n.t1, eval(n.c1)) ? 1 : 0;
      case Op::LaneShfl:
        return shuffle_down(ctx_.warp_shfl, lane(), as_i32(eval(n.c0)), warp_size_);
      case Op::LaneVote:
        return from_i32(reduce_vote(ctx_.warp_vote, static_cast<CollectiveKind>(n.a)));
    }
    return 0;
  }

  void exec(const CInstr& in) {
    Bits v = eval(in.value);
    switch (in.kind) {
      case Store::Reg: ctx_.regs[static_cast<std::size_t>(in.a)] = v; break;
      case Store::RegArr: ctx_.regs[reg_array_cell(in.a, in.b, as_i32(eval(in.index)))] = v; break;
      case Store::Global: global_cell(in.a, as_i32(eval(in.index))) = v; break;
      case Store::Shared: shared_cell(in.a, as_i32(eval(in.index))) = v; break;
      case Store::LaneVote: ctx_.warp_vote[static_cast<std::size_t>(lane())] = v; break;
      case Store::LaneShfl: ctx_.warp_shfl[static_cast<std::size_t>(lane())] = v; break;
    }
  }

  const CompiledCode& code_;
  BlockContext& ctx_;
  const BoundArgs& args_;
  int block_size_;
  int warp_size_;
  std::size_t block_base_;
};

}  // namespace

void CompiledProgram::run_block(BlockContext& ctx, const BoundArgs& args) const {
  Executor(*code_, ctx, args).run();
}

void run_mpmd(const CompiledProgram& program, BlockContext& ctx, DeviceMemory& memory,
              const std::vector<KernelArg>& args, ExecTrace* trace) {
  BoundArgs bound = bind_arguments(program.program().ir.params, args, memory);
  program.prepare(ctx, *ctx.config, trace != nullptr);
  program.run_block(ctx, bound);
  if (trace != nullptr) program.collect(ctx, *trace);
}

}  // namespace collapse
