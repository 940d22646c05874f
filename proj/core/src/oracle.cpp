#include <map>
#include <memory>
#include <sstream>

#include "collapse/exec.hpp"

namespace collapse {

namespace {

// Expression tree resolved against the kernel's symbol tables.
struct OExpr {
  enum class Kind : std::uint8_t { Lit, Local, Param, Global, Shared, Thread, Block, BlockDim, GridDim, Unary, Binary, Cast };
  Kind kind = Kind::Lit;
  ScalarKind type = ScalarKind::I32;
  Bits lit = 0;
  int slot = 0;
  UnaryOp unary = UnaryOp::Neg;
  BinaryOp binary = BinaryOp::Add;
  std::unique_ptr<OExpr> lhs;
  std::unique_ptr<OExpr> rhs;
};

struct OInstr {
  enum class Kind : std::uint8_t { Assign, Collective, WarpBarrier, BlockBarrier };
  Kind kind = Kind::Assign;
  std::string key;  // trace key; empty when untraced
  std::string text;
  // Assign/Collective target.
  OExpr::Kind target = OExpr::Kind::Local;
  int slot = 0;
  std::unique_ptr<OExpr> index;
  ScalarKind type = ScalarKind::I32;
  std::unique_ptr<OExpr> value;
  // Collective.
  CollectiveKind collective = CollectiveKind::ShflDown;
  std::unique_ptr<OExpr> arg0;
  std::unique_ptr<OExpr> arg1;
};

struct OBlock {
  std::string name;
  std::vector<OInstr> instrs;
  TermKind term = TermKind::Ret;
  std::unique_ptr<OExpr> cond;
  int target = -1;
  int else_target = -1;
  std::string key;
};

struct OKernel {
  std::string name;
  std::vector<OBlock> blocks;
  int entry = 0;
  std::size_t locals = 0;
  std::vector<std::size_t> shared_base;
  std::vector<int> shared_length;
  std::vector<std::string> shared_names;
  std::size_t shared_cells = 0;
  std::vector<std::string> param_names;
};

class Resolver {
 public:
  explicit Resolver(const KernelIR& ir) : ir_(ir) {
    for (std::size_t i = 0; i < ir.locals.size(); ++i) locals_[ir.locals[i].name] = static_cast<int>(i);
    for (std::size_t i = 0; i < ir.params.size(); ++i) params_[ir.params[i].name] = static_cast<int>(i);
    for (std::size_t i = 0; i < ir.shared.size(); ++i) shared_[ir.shared[i].name] = static_cast<int>(i);
  }

  OKernel run() {
    OKernel k;
    k.name = ir_.name;
    k.entry = ir_.cfg.entry;
    k.locals = ir_.locals.size();
    for (const auto& s : ir_.shared) {
      k.shared_base.push_back(k.shared_cells);
      k.shared_length.push_back(s.length);
      k.shared_names.push_back(s.name);
      k.shared_cells += static_cast<std::size_t>(s.length);
    }
    for (const auto& p : ir_.params) k.param_names.push_back(p.name);
    for (const auto& b : ir_.cfg.blocks) {
      OBlock ob;
      ob.name = b.name + "." + std::to_string(b.id);
      for (const auto& in : b.instrs) ob.instrs.push_back(instr(in));
      ob.term = b.term.kind;
      ob.target = b.term.target;
      ob.else_target = b.term.else_target;
      if (b.term.kind == TermKind::CondBr) {
        ob.cond = expr(*b.term.cond);
        if (b.term.id >= 0) ob.key = "t" + std::to_string(b.term.id);
      }
      k.blocks.push_back(std::move(ob));
    }
    return k;
  }

 private:
  std::unique_ptr<OExpr> expr(const Expr& e) {
    auto o = std::make_unique<OExpr>();
    o->type = e.type;
    switch (e.kind) {
      case ExprKind::IntLit:
        o->lit = from_i32(e.int_value);
        break;
      case ExprKind::FloatLit:
        o->lit = from_f32(e.float_value);
        break;
      case ExprKind::Var:
        if (auto it = locals_.find(e.name); it != locals_.end()) {
          o->kind = OExpr::Kind::Local;
          o->slot = it->second;
        } else {
          o->kind = OExpr::Kind::Param;
          o->slot = params_.at(e.name);
        }
        break;
      case ExprKind::Index:
        if (auto it = shared_.find(e.name); it != shared_.end()) {
          o->kind = OExpr::Kind::Shared;
          o->slot = it->second;
        } else {
          o->kind = OExpr::Kind::Global;
          o->slot = params_.at(e.name);
        }
        o->lhs = expr(*e.operands[0]);
        break;
      case ExprKind::Builtin:
        o->kind = e.builtin == Builtin::ThreadIdx  ? OExpr::Kind::Thread
                  : e.builtin == Builtin::BlockIdx ? OExpr::Kind::Block
                  : e.builtin == Builtin::BlockDim ? OExpr::Kind::BlockDim
                                                   : OExpr::Kind::GridDim;
        break;
      case ExprKind::Unary:
        o->kind = OExpr::Kind::Unary;
        o->unary = e.unary;
        o->lhs = expr(*e.operands[0]);
        break;
      case ExprKind::Binary:
        o->kind = OExpr::Kind::Binary;
        o->binary = e.binary;
        o->lhs = expr(*e.operands[0]);
        o->rhs = expr(*e.operands[1]);
        break;
      case ExprKind::Cast:
        o->kind = OExpr::Kind::Cast;
        o->lhs = expr(*e.operands[0]);
        break;
      default:
        throw TransformError(TransformErrorKind::Structure,
                             "reference interpreter needs the canonical kernel, found a transformed expression");
    }
    return o;
  }

  OInstr instr(const Instr& in) {
    OInstr o;
    if (in.kind == InstrKind::Barrier) {
      o.kind = in.level == BarrierLevel::Warp ? OInstr::Kind::WarpBarrier : OInstr::Kind::BlockBarrier;
      o.text = in.level == BarrierLevel::Warp ? "__syncwarp" : "__syncthreads";
      return o;
    }
    if (in.kind != InstrKind::Assign) {
      throw TransformError(TransformErrorKind::Structure, "reference interpreter needs the canonical kernel");
    }
    if (in.id >= 0) o.key = "i" + std::to_string(in.id);
    const Expr& t = *in.target;
    o.type = t.type;
    if (t.kind == ExprKind::Var) {
      o.target = OExpr::Kind::Local;
      o.slot = locals_.at(t.name);
    } else if (auto it = shared_.find(t.name); it != shared_.end()) {
      o.target = OExpr::Kind::Shared;
      o.slot = it->second;
      o.index = expr(*t.operands[0]);
    } else {
      o.target = OExpr::Kind::Global;
      o.slot = params_.at(t.name);
      o.index = expr(*t.operands[0]);
    }
    const Expr& v = *in.value;
    if (v.kind == ExprKind::Collective) {
      o.kind = OInstr::Kind::Collective;
      o.collective = v.collective;
      o.text = v.collective == CollectiveKind::ShflDown ? "shfl_down"
               : v.collective == CollectiveKind::VoteAll ? "vote_all"
                                                         : "vote_any";
      o.arg0 = expr(*v.operands[0]);
      if (v.operands.size() > 1) o.arg1 = expr(*v.operands[1]);
      o.type = v.type;
      if (v.type != t.type) {
        throw TransformError(TransformErrorKind::Structure, "collective result type differs from its target");
      }
      return o;
    }
    if (irx::contains_kind(in.value, ExprKind::Collective)) {
      throw TransformError(TransformErrorKind::Structure, "collective nested inside an expression");
    }
    ExprPtr value = in.value;
    if (value->type != t.type) value = ex::cast(t.type, value);
    o.value = expr(*value);
    return o;
  }

  const KernelIR& ir_;
  std::map<std::string, int> locals_;
  std::map<std::string, int> params_;
  std::map<std::string, int> shared_;
};

struct Lane {
  std::vector<Bits> regs;
  int block = 0;
  std::size_t pc = 0;
  bool exited = false;
};

std::string lane_set(const std::vector<int>& lanes) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < lanes.size();) {
    std::size_t j = i;
    while (j + 1 < lanes.size() && lanes[j + 1] == lanes[j] + 1) ++j;
    if (i != 0) os << ",";
    os << lanes[i];
    if (j > i) os << "-" << lanes[j];
    i = j + 1;
  }
  os << "}";
  return os.str();
}

class BlockRun {
 public:
  BlockRun(const OKernel& k, const LaunchConfig& cfg, const BoundArgs& args, int block, ExecTrace* trace,
           std::uint64_t step_limit)
      : k_(k), cfg_(cfg), args_(args), block_(block), trace_(trace), step_limit_(step_limit) {
    lanes_.resize(static_cast<std::size_t>(cfg.block_size));
    for (auto& l : lanes_) {
      l.regs.assign(k.locals, 0);
      l.block = k.entry;
    }
    shared_.assign(k.shared_cells, 0);
  }

  void run() {
    const int warps = (cfg_.block_size + cfg_.warp_size - 1) / cfg_.warp_size;
    for (;;) {
      for (int w = 0; w < warps; ++w) run_warp(w);
      std::map<std::pair<int, std::size_t>, std::vector<int>> at;
      std::vector<int> done;
      for (int t = 0; t < cfg_.block_size; ++t) {
        const Lane& l = lanes_[static_cast<std::size_t>(t)];
        if (l.exited) {
          done.push_back(t);
        } else {
          at[{l.block, l.pc}].push_back(t);
        }
      }
      if (at.empty()) return;
      if (at.size() > 1 || !done.empty()) violation("block", at, done);
      for (auto& l : lanes_) ++l.pc;
    }
  }

 private:
  [[noreturn]] void violation(const std::string& scope, const std::map<std::pair<int, std::size_t>, std::vector<int>>& at,
                              const std::vector<int>& done) const {
    std::ostringstream os;
    os << "aligned-barrier violation in kernel '" << k_.name << "' block " << block_ << " (" << scope
       << "): not all lanes reach the same synchronization point;";
    for (const auto& [pos, lanes] : at) {
      const OBlock& b = k_.blocks[static_cast<std::size_t>(pos.first)];
      os << " lanes " << lane_set(lanes) << " at " << b.instrs[pos.second].text << " in " << b.name << ";";
    }
    if (!done.empty()) os << " lanes " << lane_set(done) << " exited;";
    std::string s = os.str();
    s.pop_back();
    throw ExecError(ExecErrorKind::BarrierViolation, s);
  }

  [[noreturn]] void out_of_bounds(const std::string& what, std::int32_t index, std::size_t size, int lane) const {
    throw ExecError(ExecErrorKind::OutOfBounds,
                    what + " index " + std::to_string(index) + " out of bounds [0, " + std::to_string(size) +
                        ") in kernel '" + k_.name + "' block " + std::to_string(block_) + " thread " +
                        std::to_string(lane));
  }

  Bits& cell(OExpr::Kind kind, int slot, std::int32_t index, int lane) {
    if (kind == OExpr::Kind::Shared) {
      const auto s = static_cast<std::size_t>(slot);
      const auto len = static_cast<std::size_t>(k_.shared_length[s]);
      if (index < 0 || static_cast<std::size_t>(index) >= len) {
        out_of_bounds("shared array '" + k_.shared_names[s] + "'", index, len, lane);
      }
      return shared_[k_.shared_base[s] + static_cast<std::size_t>(index)];
    }
    std::span<Bits> buf = args_.buffers[static_cast<std::size_t>(slot)];
    if (index < 0 || static_cast<std::size_t>(index) >= buf.size()) {
      out_of_bounds("buffer '" + k_.param_names[static_cast<std::size_t>(slot)] + "'", index, buf.size(), lane);
    }
    return buf[static_cast<std::size_t>(index)];
  }

  Bits eval(const OExpr& e, int lane) {
    Lane& l = lanes_[static_cast<std::size_t>(lane)];
    switch (e.kind) {
      case OExpr::Kind::Lit: return e.lit;
      case OExpr::Kind::Local: return l.regs[static_cast<std::size_t>(e.slot)];
      case OExpr::Kind::Param: return args_.scalars[static_cast<std::size_t>(e.slot)];
      case OExpr::Kind::Global:
      case OExpr::Kind::Shared: return cell(e.kind, e.slot, as_i32(eval(*e.lhs, lane)), lane);
      case OExpr::Kind::Thread: return from_i32(lane);
      case OExpr::Kind::Block: return from_i32(block_);
      case OExpr::Kind::BlockDim: return from_i32(cfg_.block_size);
      case OExpr::Kind::GridDim: return from_i32(cfg_.grid_size);
      case OExpr::Kind::Unary: return apply_unary(e.unary, e.lhs->type, eval(*e.lhs, lane));
      case OExpr::Kind::Cast: return convert(e.lhs->type, e.type, eval(*e.lhs, lane));
      case OExpr::Kind::Binary:
        if (e.binary == BinaryOp::LogAnd) {
          if (!truthy(e.lhs->type, eval(*e.lhs, lane))) return 0;
          return truthy(e.rhs->type, eval(*e.rhs, lane)) ? 1 : 0;
        }
        if (e.binary == BinaryOp::LogOr) {
          if (truthy(e.lhs->type, eval(*e.lhs, lane))) return 1;
          return truthy(e.rhs->type, eval(*e.rhs, lane)) ? 1 : 0;
        }
        return apply_binary(e.binary, e.lhs->type, eval(*e.lhs, lane), e.rhs->type, eval(*e.rhs, lane));
    }
    return 0;
  }

  void count(const std::string& key, std::uint64_t n = 1) {
    if (trace_ != nullptr && !key.empty()) trace_->counts[key] += n;
  }

  void store(const OInstr& in, int lane, Bits v) {
    if (in.target == OExpr::Kind::Local) {
      lanes_[static_cast<std::size_t>(lane)].regs[static_cast<std::size_t>(in.slot)] = v;
    } else {
      cell(in.target, in.slot, as_i32(eval(*in.index, lane)), lane) = v;
    }
  }

  void step() {
    if (++steps_ > step_limit_) {
      throw ExecError(ExecErrorKind::StepLimit, "step limit of " + std::to_string(step_limit_) +
                                                    " exceeded in kernel '" + k_.name + "' block " +
                                                    std::to_string(block_));
    }
  }

  // Advances one lane to its next synchronization point or to kernel exit.
  void run_lane(int lane) {
    Lane& l = lanes_[static_cast<std::size_t>(lane)];
    while (!l.exited) {
      const OBlock& b = k_.blocks[static_cast<std::size_t>(l.block)];
      if (l.pc < b.instrs.size()) {
        const OInstr& in = b.instrs[l.pc];
        if (in.kind != OInstr::Kind::Assign) return;
        step();
        store(in, lane, eval(*in.value, lane));
        count(in.key);
        ++l.pc;
        continue;
      }
      step();
      switch (b.term) {
        case TermKind::Ret:
          l.exited = true;
          break;
        case TermKind::Br:
          l.block = b.target;
          l.pc = 0;
          break;
        case TermKind::CondBr:
          l.block = truthy(b.cond->type, eval(*b.cond, lane)) ? b.target : b.else_target;
          l.pc = 0;
          count(b.key);
          break;
      }
    }
  }

  // Runs warp `w` in lockstep at warp-level operations until every lane has
  // exited or waits at a block barrier.
  void run_warp(int w) {
    const int first = w * cfg_.warp_size;
    const int last = std::min(cfg_.block_size, first + cfg_.warp_size);
    for (;;) {
      for (int t = first; t < last; ++t) run_lane(t);
      std::map<std::pair<int, std::size_t>, std::vector<int>> at;
      std::vector<int> done;
      for (int t = first; t < last; ++t) {
        const Lane& l = lanes_[static_cast<std::size_t>(t)];
        if (l.exited) {
          done.push_back(t);
        } else {
          at[{l.block, l.pc}].push_back(t);
        }
      }
      if (at.empty()) return;
      if (at.size() > 1 || !done.empty()) violation("warp " + std::to_string(w), at, done);
      const auto [blk, pc] = at.begin()->first;
      const OInstr& in = k_.blocks[static_cast<std::size_t>(blk)].instrs[pc];
      if (in.kind == OInstr::Kind::BlockBarrier) return;
      if (in.kind == OInstr::Kind::Collective) collective(in, first, last);
      for (int t = first; t < last; ++t) ++lanes_[static_cast<std::size_t>(t)].pc;
    }
  }

  // All lanes evaluate their operands before any lane receives a result.
  void collective(const OInstr& in, int first, int last) {
    const auto n = static_cast<std::size_t>(last - first);
    std::vector<Bits> value(n);
    std::vector<std::int32_t> offset(n, 0);
    for (int t = first; t < last; ++t) {
      step();
      const auto i = static_cast<std::size_t>(t - first);
      value[i] = eval(*in.arg0, t);
      if (in.arg1) offset[i] = as_i32(eval(*in.arg1, t));
    }
    std::vector<Bits> result(n);
    if (in.collective == CollectiveKind::ShflDown) {
      for (std::size_t i = 0; i < n; ++i) {
        std::int64_t src = static_cast<std::int64_t>(i) + offset[i];
        result[i] = src >= 0 && src < static_cast<std::int64_t>(n) ? value[static_cast<std::size_t>(src)] : value[i];
      }
    } else {
      bool all = true;
      bool any = false;
      for (std::size_t i = 0; i < n; ++i) {
        bool p = truthy(in.arg0->type, value[i]);
        all = all && p;
        any = any || p;
      }
      Bits r = (in.collective == CollectiveKind::VoteAll ? all : any) ? 1 : 0;
      std::fill(result.begin(), result.end(), r);
    }
    for (int t = first; t < last; ++t) store(in, t, result[static_cast<std::size_t>(t - first)]);
    count(in.key, n);
  }

  const OKernel& k_;
  const LaunchConfig& cfg_;
  const BoundArgs& args_;
  int block_;
  ExecTrace* trace_;
  std::uint64_t step_limit_;
  std::uint64_t steps_ = 0;
  std::vector<Lane> lanes_;
  std::vector<Bits> shared_;
};

}  // namespace

void run_oracle(const KernelIR& canonical, const LaunchConfig& config, DeviceMemory& memory,
                const std::vector<KernelArg>& args, ExecTrace* trace, const OracleOptions& options) {
  if (config.block_size < 1 || config.warp_size < 1 || config.grid_size < 0) {
    throw TransformError(TransformErrorKind::Configuration, "invalid launch configuration");
  }
  const OKernel k = Resolver(canonical).run();
  BoundArgs bound = bind_arguments(canonical.params, args, memory);
  for (int b = 0; b < config.grid_size; ++b) {
    BlockRun(k, config, bound, b, trace, options.step_limit).run();
  }
}

void run_oracle(const KernelDef& kernel, const LaunchConfig& config, DeviceMemory& memory,
                const std::vector<KernelArg>& args, ExecTrace* trace, const OracleOptions& options) {
  run_oracle(canonical_ir(kernel), config, memory, args, trace, options);
}

}  // namespace collapse
