#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "collapse/cfg.hpp"
#include "collapse/ir.hpp"

namespace collapse {

// ---------------------------------------------------------------- warp lowering

/// Replaces each hoisted collective with lane-buffer traffic fenced by a
/// raw-hazard and a war-hazard warp barrier. The skip flags exist for
/// mutation testing only.
void lower_collectives(KernelIR& ir, bool skip_raw = false, bool skip_war = false);

/// 1 iff every (all) or some (any) predicate is nonzero.
std::int32_t reduce_vote(std::span<const std::uint32_t> lanes, CollectiveKind kind);

/// buffer[lane + offset] when that lane exists within `width`, else buffer[lane].
std::uint32_t shuffle_down(std::span<const std::uint32_t> buffer, int lane, std::int32_t offset, int width);

// ---------------------------------------------------------------- barriers

void insert_boundary_barriers(Cfg& cfg);
/// Extra barriers around if-constructs whose bodies hold barriers (worklist fixpoint).
void insert_if_barriers(Cfg& cfg);
/// Extra barriers at latch end, header begin and exit begin of loops with barriers.
void insert_for_barriers(Cfg& cfg);
/// If-pass, for-pass, then a final if-pass. `skip_if` disables both if-passes.
void insert_extra_barriers(Cfg& cfg, bool skip_if = false);
/// Splits barrier-guarding branches into a peel block that only branches on a
/// flag computed before the fencing barrier.
void purity_split_cond(KernelIR& ir);

// ---------------------------------------------------------------- regions

/// Every barrier becomes the last instruction of its block and is followed by
/// an unconditional branch or a return.
void split_at_barriers(Cfg& cfg);

struct ParallelRegion {
  BarrierLevel level = BarrierLevel::Warp;
  std::vector<int> blocks;  // sorted
  int tail = -1;
  bool contains(int b) const;
};

/// Peel block: a block whose only content is a peel branch.
bool is_peel_block(const BasicBlock& b);

std::vector<ParallelRegion> find_parallel_regions(const Cfg& cfg, BarrierLevel level, const DomTrees& trees);

enum class LoopKind : std::uint8_t {
  IntraWarp,  // __tx in [0, warp size)
  InterWarp,  // __wid in [0, blockDim.x / warp size)
  Flat,       // __tx in [0, blockDim.x)
};

struct WrapOptions {
  LoopKind kind = LoopKind::IntraWarp;
  int warp_size = 32;
  /// Accept regions with several entry blocks by entering at the first in RPO.
  bool tolerate_multi_entry = false;
};

/// Encloses each region in an init/cond/inc/end loop, deletes the region-ending
/// barriers of the wrapped level and records region membership in the blocks.
void wrap_regions(KernelIR& ir, const std::vector<ParallelRegion>& regions, const WrapOptions& options);

/// Removes every barrier of `level` still present.
void erase_barriers(Cfg& cfg, BarrierLevel level);

struct ReplicatedLocal {
  std::string name;
  ScalarKind type = ScalarKind::I32;
  Replication extent = Replication::Scalar;
};

/// Classifies locals by the regions that reference them and rewrites their uses;
/// also rewrites threadIdx.x in terms of the loop induction variables.
std::vector<ReplicatedLocal> replicate_locals(KernelIR& ir, bool hierarchical, int warp_size);

// ---------------------------------------------------------------- pipeline

struct MpmdProgram {
  KernelIR ir;
  CollapseMode mode = CollapseMode::Hier;  // Flat or Hier once transformed
  int warp_size = 32;
  bool specialized = false;
  int block_size = 0;  // constant folded in when specialized
  int grid_size = 0;
  std::vector<ReplicatedLocal> replicated;
  std::vector<ParallelRegion> warp_regions;   // found in step 4
  std::vector<ParallelRegion> block_regions;  // found in step 5
};

struct TransformOptions {
  CollapseMode mode = CollapseMode::Auto;
  int warp_size = 32;
  int block_size = 0;  // 0: not known at transform time
  bool skip_raw = false;
  bool skip_war = false;
  bool skip_extra = false;
  /// Runs the structural verifier after each step and throws on violations.
  bool verify = true;
  /// Receives the kernel after each step: 0 canonical input, 1 collectives
  /// lowered, 2 barriers inserted, 3 split, 4 intra-warp wrap, 5 inter-warp
  /// wrap, 6 locals replicated.
  std::function<void(int step, const KernelIR&)> on_step;
};

bool uses_warp_features(const KernelIR& ir);

/// Canonical CFG of a kernel: build_cfg followed by canonicalize.
KernelIR canonical_ir(const KernelDef& kernel);

MpmdProgram hybrid_transform(const KernelDef& kernel, const TransformOptions& options);

/// Substitutes launch dimensions as constants and simplifies. Idempotent.
MpmdProgram specialize(const MpmdProgram& program, int block_size, int grid_size);

// ---------------------------------------------------------------- verification

/// Lane-buffer writes separated from reads by one raw barrier and followed by
/// one war barrier before the next write.
std::vector<std::string> verify_lowering(const KernelIR& ir);

/// Every barrier-holding if/for construct is fenced by same-level barriers.
std::vector<std::string> verify_fencing(const Cfg& cfg);

/// Partition and nesting of warp/block regions on a split CFG.
std::vector<std::string> verify_regions(const Cfg& cfg, const std::vector<ParallelRegion>& warp,
                                        const std::vector<ParallelRegion>& block);

/// No barriers remain; every source instruction lies inside wrapping loops.
std::vector<std::string> verify_program(const MpmdProgram& program);

}  // namespace collapse
