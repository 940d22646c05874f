#pragma once

#include <set>
#include <string>
#include <vector>

#include "collapse/ir.hpp"

namespace collapse {

/// Lowers a checked kernel to a CFG with a synthetic empty entry block and a
/// synthetic exit block. Collectives are hoisted into `__ctN` temporaries.
KernelIR build_cfg(const KernelDef& kernel);

/// Immediate dominators and post-dominators; -1 for the root and for
/// unreachable blocks.
struct DomTrees {
  std::vector<int> idom;
  std::vector<int> ipdom;
  std::vector<int> rpo;        // reverse post-order from entry
  std::vector<int> rpo_index;  // block -> position in rpo, -1 if unreachable

  bool dominates(int a, int b) const;
  bool postdominates(int a, int b) const;
  bool reachable(int b) const { return rpo_index[static_cast<std::size_t>(b)] >= 0; }
};

DomTrees compute_domtrees(const Cfg& cfg);

struct LoopInfo {
  int header = -1;
  int latch = -1;
  int preheader = -1;
  std::vector<int> exiting;
  std::vector<int> exits;
  std::set<int> body;
  std::vector<int> latches;  // every back-edge source before canonicalization
};

/// Natural loops of the CFG, outermost first. Throws TransformError(Irreducible)
/// on a retreating edge whose target does not dominate its source.
std::vector<LoopInfo> find_loops(const Cfg& cfg, const DomTrees& trees);

/// Brings a CFG into canonical shape: unreachable blocks removed, one return,
/// exit with a single predecessor, loops with one latch, a preheader and
/// dedicated exits. Idempotent.
void canonicalize(Cfg& cfg);

/// Checks the canonical-form invariants; returns human-readable violations.
std::vector<std::string> check_canonical(const Cfg& cfg);

}  // namespace collapse
