#include <map>
#include <set>

#include "collapse/transform.hpp"

namespace collapse {

namespace {

bool is_induction(const std::string& name) { return name == "__tx" || name == "__wid"; }

}  // namespace

std::vector<ReplicatedLocal> replicate_locals(KernelIR& ir, bool hierarchical, int warp_size) {
  Cfg& cfg = ir.cfg;
  std::map<std::string, std::set<std::pair<int, int>>> scopes;
  for (const auto& b : cfg.blocks) {
    std::pair<int, int> scope{b.block_region, b.warp_region};
    auto note = [&](const ExprPtr& e) {
      irx::visit(e, [&](const Expr& x) {
        if (x.kind == ExprKind::Var && !is_induction(x.name) && ir.find_local(x.name) != nullptr) {
          scopes[x.name].insert(scope);
        }
      });
    };
    for (const auto& in : b.instrs) irx::for_each_expr(in, note);
    irx::for_each_expr(b.term, note);
  }

  std::vector<ReplicatedLocal> out;
  for (auto& local : ir.locals) {
    if (is_induction(local.name)) continue;
    auto it = scopes.find(local.name);
    Replication r = Replication::Scalar;
    if (it != scopes.end()) {
      std::set<int> block_scopes;
      std::set<int> warp_scopes;
      for (auto [bs, ws] : it->second) {
        block_scopes.insert(bs);
        warp_scopes.insert(ws);
      }
      if (block_scopes.size() > 1) {
        r = Replication::Block;
      } else if (warp_scopes.size() > 1) {
        r = Replication::Warp;
      }
    }
    local.replication = r;
    if (r != Replication::Scalar) out.push_back({local.name, local.type, r});
  }

  const ExprPtr zero = ex::int_lit(0);
  for (auto& b : cfg.blocks) {
    PeelLevel peel = b.term.peel;
    ExprPtr tx = peel != PeelLevel::None ? zero : ex::var("__tx", ScalarKind::I32);
    ExprPtr wid = peel == PeelLevel::Block ? zero : ex::var("__wid", ScalarKind::I32);
    ExprPtr thread = hierarchical
                         ? ex::binary(BinaryOp::Add, ex::binary(BinaryOp::Mul, wid, ex::int_lit(warp_size)), tx)
                         : tx;
    auto fix = [&](const ExprPtr& e) {
      return irx::rewrite(e, [&](const ExprPtr& x) -> ExprPtr {
        if (x->kind == ExprKind::Builtin && x->builtin == Builtin::ThreadIdx) return thread;
        if (x->kind != ExprKind::Var) return nullptr;
        const LocalInfo* l = ir.find_local(x->name);
        if (l == nullptr || l->replication == Replication::Scalar) return nullptr;
        return ex::local_elem(x->name, x->type, l->replication == Replication::Warp ? tx : thread);
      });
    };
    for (auto& in : b.instrs) {
      if (in.target) in.target = fix(in.target);
      if (in.value) in.value = fix(in.value);
    }
    if (b.term.cond) b.term.cond = fix(b.term.cond);
  }
  return out;
}

}  // namespace collapse
