#pragma once

#include <string>

#include "collapse/ir.hpp"

namespace collapse {

std::string format_instr(const Instr& in);
std::string format_terminator(const Cfg& cfg, const Terminator& term);
/// `name.id`, unique within a CFG.
std::string block_label(const BasicBlock& b);

/// Plain-text listing of a kernel: symbol tables followed by blocks in id order.
std::string dump_text(const KernelIR& ir);

/// Graphviz rendering; nodes in id order, edges in successor order.
std::string dump_dot(const KernelIR& ir, const std::string& title);

}  // namespace collapse
