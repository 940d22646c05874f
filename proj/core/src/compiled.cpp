#include <map>

#include "collapse/exec.hpp"
#include "compiled_code.hpp"

namespace collapse::detail {

std::string trace_key(const Instr& in) {
  if (in.kind == InstrKind::Barrier || in.id < 0) return {};
  const std::string id = std::to_string(in.id);
  switch (in.role) {
    case TraceRole::Plain: return "i" + id;
    case TraceRole::Store: return "i" + id + ".store";
    case TraceRole::Load: return "i" + id + ".load";
    case TraceRole::Flag: return "t" + id + ".flag";
  }
  return {};
}

std::string trace_key(const Terminator& t) {
  if (t.kind != TermKind::CondBr || t.id < 0) return {};
  return "t" + std::to_string(t.id) + (t.peel != PeelLevel::None ? ".peel" : "");
}

namespace {

class Compiler {
 public:
  Compiler(const KernelIR& ir, const std::vector<ReplicatedLocal>& replicated, int warp_size)
      : ir_(ir) {
    code_.kernel = ir.name;
    code_.warp_size = warp_size;
    for (const auto& r : replicated) {
      if (r.extent == Replication::Warp) {
        arrays_[r.name] = {0, static_cast<int>(code_.warp_arrays++)};
      } else {
        arrays_[r.name] = {1, static_cast<int>(code_.block_arrays++)};
      }
    }
    for (const auto& l : ir.locals) {
      if (!arrays_.count(l.name)) slots_[l.name] = static_cast<int>(code_.scalar_slots++);
    }
    auto tx = slots_.find("__tx");
    code_.tx_slot = tx == slots_.end() ? -1 : tx->second;
    for (std::size_t i = 0; i < ir.params.size(); ++i) {
      params_[ir.params[i].name] = static_cast<int>(i);
      code_.buffer_names.push_back(ir.params[i].name);
    }
    for (std::size_t i = 0; i < ir.shared.size(); ++i) {
      shared_[ir.shared[i].name] = static_cast<int>(i);
      code_.shared_base.push_back(code_.shared_cells);
      code_.shared_length.push_back(ir.shared[i].length);
      code_.shared_names.push_back(ir.shared[i].name);
      code_.shared_cells += static_cast<std::size_t>(ir.shared[i].length);
    }
  }

  CompiledCode run() {
    const Cfg& cfg = ir_.cfg;
    code_.entry = cfg.entry;
    code_.blocks.resize(cfg.size());
    for (const auto& b : cfg.blocks) {
      CBlock& cb = code_.blocks[static_cast<std::size_t>(b.id)];
      for (const auto& in : b.instrs) {
        if (in.kind == InstrKind::Barrier) continue;
        cb.instrs.push_back(instr(in));
      }
      cb.term = b.term.kind;
      cb.target = b.term.target;
      cb.else_target = b.term.else_target;
      if (b.term.kind == TermKind::CondBr) {
        cb.cond = expr(b.term.cond);
        cb.trace = trace_slot(trace_key(b.term));
      }
    }
    return std::move(code_);
  }

 private:
  int trace_slot(const std::string& key) {
    if (key.empty()) return -1;
    auto [it, fresh] = trace_index_.try_emplace(key, static_cast<int>(code_.trace_keys.size()));
    if (fresh) code_.trace_keys.push_back(key);
    return it->second;
  }

  int push(Node n) {
    code_.nodes.push_back(n);
    return static_cast<int>(code_.nodes.size() - 1);
  }

  int expr(const ExprPtr& e) {
    Node n;
    n.type = e->type;
    switch (e->kind) {
      case ExprKind::IntLit:
        n.op = Op::Const;
        n.k = from_i32(e->int_value);
        break;
      case ExprKind::FloatLit:
        n.op = Op::Const;
        n.k = from_f32(e->float_value);
        break;
      case ExprKind::Var: {
        if (auto s = slots_.find(e->name); s != slots_.end()) {
          n.op = Op::Reg;
          n.a = s->second;
        } else if (auto p = params_.find(e->name); p != params_.end()) {
          n.op = Op::Param;
          n.a = p->second;
        } else {
          throw TransformError(TransformErrorKind::Structure, "unresolved variable '" + e->name + "'");
        }
        break;
      }
      case ExprKind::LocalElem: {
        auto it = arrays_.find(e->name);
        if (it == arrays_.end()) {
          throw TransformError(TransformErrorKind::Structure, "'" + e->name + "' is not a replicated local");
        }
        n.op = Op::RegArr;
        n.a = it->second.first;
        n.b = it->second.second;
        n.c0 = expr(e->operands[0]);
        break;
      }
      case ExprKind::Index: {
        if (auto s = shared_.find(e->name); s != shared_.end()) {
          n.op = Op::Shared;
          n.a = s->second;
        } else {
          n.op = Op::Global;
          n.a = params_.at(e->name);
        }
        n.c0 = expr(e->operands[0]);
        break;
      }
      case ExprKind::Builtin:
        switch (e->builtin) {
          case Builtin::BlockIdx: n.op = Op::BlockIdx; break;
          case Builtin::BlockDim: n.op = Op::BlockDim; break;
          case Builtin::GridDim: n.op = Op::GridDim; break;
          case Builtin::ThreadIdx:
            throw TransformError(TransformErrorKind::Structure, "threadIdx.x left after replication");
        }
        break;
      case ExprKind::Unary:
        n.op = Op::Unary;
        n.sub = static_cast<std::uint8_t>(e->unary);
        n.t0 = e->operands[0]->type;
        n.c0 = expr(e->operands[0]);
        break;
      case ExprKind::Binary:
        n.op = e->binary == BinaryOp::LogAnd ? Op::LogAnd : e->binary == BinaryOp::LogOr ? Op::LogOr : Op::Binary;
        n.sub = static_cast<std::uint8_t>(e->binary);
        n.t0 = e->operands[0]->type;
        n.t1 = e->operands[1]->type;
        n.c0 = expr(e->operands[0]);
        n.c1 = expr(e->operands[1]);
        break;
      case ExprKind::Cast:
        n.op = Op::Cast;
        n.t0 = e->operands[0]->type;
        n.c0 = expr(e->operands[0]);
        break;
      case ExprKind::LaneShfl:
        n.op = Op::LaneShfl;
        n.c0 = expr(e->operands[0]);
        break;
      case ExprKind::LaneVote:
        n.op = Op::LaneVote;
        n.a = static_cast<std::int32_t>(e->collective);
        break;
      case ExprKind::Collective:
        throw TransformError(TransformErrorKind::Structure, "collective left unlowered");
    }
    return push(n);
  }

  CInstr instr(const Instr& in) {
    CInstr c;
    c.trace = trace_slot(trace_key(in));
    if (in.kind == InstrKind::LaneStore) {
      c.kind = in.buffer == LaneBufferKind::Vote ? Store::LaneVote : Store::LaneShfl;
      c.value = expr(in.value);
      return c;
    }
    const ExprPtr& t = in.target;
    ExprPtr value = in.value;
    if (value->type != t->type) value = ex::cast(t->type, value);
    c.value = expr(value);
    switch (t->kind) {
      case ExprKind::Var:
        c.kind = Store::Reg;
        c.a = slots_.at(t->name);
        break;
      case ExprKind::LocalElem: {
        auto it = arrays_.at(t->name);
        c.kind = Store::RegArr;
        c.a = it.first;
        c.b = it.second;
        c.index = expr(t->operands[0]);
        break;
      }
      case ExprKind::Index:
        if (auto s = shared_.find(t->name); s != shared_.end()) {
          c.kind = Store::Shared;
          c.a = s->second;
        } else {
          c.kind = Store::Global;
          c.a = params_.at(t->name);
        }
        c.index = expr(t->operands[0]);
        break;
      default:
        throw TransformError(TransformErrorKind::Structure, "invalid assignment target");
    }
    return c;
  }

  const KernelIR& ir_;
  CompiledCode code_;
  std::map<std::string, int> slots_;
  std::map<std::string, std::pair<int, int>> arrays_;
  std::map<std::string, int> params_;
  std::map<std::string, int> shared_;
  std::map<std::string, int> trace_index_;
};

}  // namespace

CompiledCode compile(const KernelIR& ir, const std::vector<ReplicatedLocal>& replicated, int warp_size) {
  return Compiler(ir, replicated, warp_size).run();
}

}  // namespace collapse::detail

namespace collapse {

CompiledProgram::CompiledProgram(const MpmdProgram& program)
    : program_(program),
      code_(std::make_unique<detail::CompiledCode>(
          detail::compile(program.ir, program.replicated, program.warp_size))) {}

CompiledProgram::~CompiledProgram() = default;
CompiledProgram::CompiledProgram(CompiledProgram&&) noexcept = default;
CompiledProgram& CompiledProgram::operator=(CompiledProgram&&) noexcept = default;

void CompiledProgram::prepare(BlockContext& ctx, const LaunchConfig& config, bool tracing) const {
  const auto w = static_cast<std::size_t>(code_->warp_size);
  const auto b = static_cast<std::size_t>(config.block_size);
  ctx.config = &config;
  ctx.regs.assign(code_->scalar_slots + code_->warp_arrays * w + code_->block_arrays * b, 0);
  ctx.shared.assign(code_->shared_cells, 0);
  ctx.warp_vote.assign(w, 0);
  ctx.warp_shfl.assign(w, 0);
  ctx.counts.assign(tracing ? code_->trace_keys.size() : 0, 0);
}

void CompiledProgram::collect(const BlockContext& ctx, ExecTrace& trace) const {
  for (std::size_t i = 0; i < ctx.counts.size(); ++i) {
    if (ctx.counts[i] != 0) trace.counts[code_->trace_keys[i]] += ctx.counts[i];
  }
}

}  // namespace collapse
