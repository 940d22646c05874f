#include "collapse/transform.hpp"

namespace collapse {

namespace {

void check_clean(const std::vector<std::string>& problems, const std::string& what) {
  if (problems.empty()) return;
  std::string msg = what + ":";
  for (const auto& p : problems) msg += "\n  " + p;
  throw TransformError(TransformErrorKind::Structure, msg);
}

}  // namespace

bool uses_warp_features(const KernelIR& ir) {
  for (const auto& b : ir.cfg.blocks) {
    for (const auto& in : b.instrs) {
      if (in.kind == InstrKind::Barrier && in.level == BarrierLevel::Warp) return true;
      if (in.kind == InstrKind::LaneStore) return true;
      bool found = false;
      irx::for_each_expr(in, [&](const ExprPtr& e) {
        found = found || irx::contains_kind(e, ExprKind::Collective) || irx::contains_kind(e, ExprKind::LaneShfl) ||
                irx::contains_kind(e, ExprKind::LaneVote);
      });
      if (found) return true;
    }
  }
  return false;
}

KernelIR canonical_ir(const KernelDef& kernel) {
  KernelIR ir = build_cfg(kernel);
  canonicalize(ir.cfg);
  return ir;
}

MpmdProgram hybrid_transform(const KernelDef& kernel, const TransformOptions& options) {
  if (options.warp_size < 1) {
    throw TransformError(TransformErrorKind::Configuration, "warp size must be at least 1");
  }
  MpmdProgram prog;
  prog.warp_size = options.warp_size;
  prog.ir = canonical_ir(kernel);
  KernelIR& ir = prog.ir;
  auto step = [&](int n) {
    if (options.on_step) options.on_step(n, ir);
  };

  const bool warp = uses_warp_features(ir);
  CollapseMode mode = options.mode;
  if (mode == CollapseMode::Auto) mode = warp ? CollapseMode::Hier : CollapseMode::Flat;
  if (mode == CollapseMode::Flat && warp) {
    throw TransformError(TransformErrorKind::UnsupportedFeature,
                         "kernel '" + kernel.name +
                             "' uses warp-level features (collectives or __syncwarp), which flat collapsing cannot "
                             "express; use --mode hier or --mode auto");
  }
  const bool hier = mode == CollapseMode::Hier;
  if (hier && options.block_size > 0 && options.block_size % options.warp_size != 0) {
    throw TransformError(TransformErrorKind::Configuration,
                         "block size " + std::to_string(options.block_size) + " is not a multiple of warp size " +
                             std::to_string(options.warp_size));
  }
  prog.mode = mode;
  const bool mutated = options.skip_raw || options.skip_war || options.skip_extra;
  const bool verify = options.verify && !mutated;

  if (verify) check_clean(check_canonical(ir.cfg), "canonical form violated");
  step(0);

  if (hier) {
    lower_collectives(ir, options.skip_raw, options.skip_war);
    if (verify) check_clean(verify_lowering(ir), "collective lowering violated");
  }
  step(1);

  insert_boundary_barriers(ir.cfg);
  insert_extra_barriers(ir.cfg, options.skip_extra);
  if (verify) check_clean(verify_fencing(ir.cfg), "barrier fencing violated");
  purity_split_cond(ir);
  step(2);

  split_at_barriers(ir.cfg);
  step(3);
  if (verify) {
    DomTrees trees = compute_domtrees(ir.cfg);
    check_clean(verify_regions(ir.cfg, find_parallel_regions(ir.cfg, BarrierLevel::Warp, trees),
                               find_parallel_regions(ir.cfg, BarrierLevel::Block, trees)),
                "parallel-region partition violated");
  }

  WrapOptions wrap;
  wrap.warp_size = options.warp_size;
  wrap.tolerate_multi_entry = mutated;
  if (hier) {
    DomTrees trees = compute_domtrees(ir.cfg);
    prog.warp_regions = find_parallel_regions(ir.cfg, BarrierLevel::Warp, trees);
    wrap.kind = LoopKind::IntraWarp;
    wrap_regions(ir, prog.warp_regions, wrap);
  }
  step(4);

  {
    DomTrees trees = compute_domtrees(ir.cfg);
    prog.block_regions = find_parallel_regions(ir.cfg, BarrierLevel::Block, trees);
    wrap.kind = hier ? LoopKind::InterWarp : LoopKind::Flat;
    wrap_regions(ir, prog.block_regions, wrap);
  }
  step(5);

  prog.replicated = replicate_locals(ir, hier, options.warp_size);
  step(6);
  if (verify) check_clean(verify_program(prog), "transformed program violated");
  return prog;
}

}  // namespace collapse
