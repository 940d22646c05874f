#include "collapse/dump.hpp"

#include <sstream>

#include "collapse/parser.hpp"

namespace collapse {

namespace {

std::string trace_tag(const Instr& in) {
  if (in.id < 0) return "";
  switch (in.role) {
    case TraceRole::Plain: return "[i" + std::to_string(in.id) + "] ";
    case TraceRole::Store: return "[i" + std::to_string(in.id) + ".store] ";
    case TraceRole::Load: return "[i" + std::to_string(in.id) + ".load] ";
    case TraceRole::Flag: return "[t" + std::to_string(in.id) + ".flag] ";
  }
  return "";
}

const char* buffer_name(LaneBufferKind k) { return k == LaneBufferKind::Vote ? "warp_vote" : "warp_shfl"; }

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\' || c == '{' || c == '}' || c == '<' || c == '>' || c == '|') out += '\\';
    out += c;
  }
  return out;
}

const char* replication_text(Replication r) {
  switch (r) {
    case Replication::Scalar: return "scalar";
    case Replication::Warp: return "warp";
    case Replication::Block: return "block";
  }
  return "?";
}

}  // namespace

std::string block_label(const BasicBlock& b) { return b.name + "." + std::to_string(b.id); }

std::string format_instr(const Instr& in) {
  switch (in.kind) {
    case InstrKind::Assign:
      return trace_tag(in) + print_expr(in.target) + " = " + print_expr(in.value);
    case InstrKind::LaneStore:
      return trace_tag(in) + buffer_name(in.buffer) + "[__tx] = " + print_expr(in.value);
    case InstrKind::Barrier:
      return "barrier." + std::string(to_string(in.level)) + " [" + std::string(to_string(in.origin)) + "]";
  }
  return "?";
}

std::string format_terminator(const Cfg& cfg, const Terminator& t) {
  switch (t.kind) {
    case TermKind::Br:
      return "br " + block_label(cfg[t.target]);
    case TermKind::CondBr: {
      std::string tag;
      if (t.id >= 0) tag = "[t" + std::to_string(t.id) + (t.peel != PeelLevel::None ? ".peel" : "") + "] ";
      std::string s = tag + "br " + print_expr(t.cond) + " ? " + block_label(cfg[t.target]) + " : " +
                      block_label(cfg[t.else_target]);
      if (t.peel == PeelLevel::Warp) s += " (warp peel)";
      if (t.peel == PeelLevel::Block) s += " (block peel)";
      return s;
    }
    case TermKind::Ret:
      return "ret";
  }
  return "?";
}

std::string dump_text(const KernelIR& ir) {
  std::ostringstream os;
  os << "kernel " << ir.name << '(';
  for (std::size_t i = 0; i < ir.params.size(); ++i) {
    if (i) os << ", ";
    const Param& p = ir.params[i];
    os << (p.type.is_buffer ? "global " : "") << to_string(p.type.elem) << (p.type.is_buffer ? "* " : " ") << p.name;
  }
  os << ")\n";
  for (const auto& s : ir.shared) os << "  shared " << to_string(s.type) << ' ' << s.name << '[' << s.length << "]\n";
  for (const auto& l : ir.locals) {
    os << "  local " << to_string(l.type) << ' ' << l.name;
    if (l.replication != Replication::Scalar) os << " (" << replication_text(l.replication) << ')';
    os << '\n';
  }
  os << "  entry " << block_label(ir.cfg[ir.cfg.entry]) << ", exit " << block_label(ir.cfg[ir.cfg.exit]) << '\n';
  for (const auto& b : ir.cfg.blocks) {
    os << block_label(b) << ':';
    if (b.guards_barrier) os << " ; guards " << to_string(b.guard_level) << " barrier";
    os << '\n';
    for (const auto& in : b.instrs) os << "  " << format_instr(in) << '\n';
    os << "  " << format_terminator(ir.cfg, b.term) << '\n';
  }
  return os.str();
}

std::string dump_dot(const KernelIR& ir, const std::string& title) {
  std::ostringstream os;
  os << "digraph \"" << dot_escape(title) << "\" {\n";
  os << "  node [shape=record, fontname=\"monospace\"];\n";
  for (const auto& b : ir.cfg.blocks) {
    os << "  b" << b.id << " [label=\"{" << dot_escape(block_label(b));
    for (const auto& in : b.instrs) {
      std::string line = format_instr(in);
      os << "|" << dot_escape(line);
    }
    os << "|" << dot_escape(format_terminator(ir.cfg, b.term)) << "}\"";
    if (b.has_barrier()) os << ", style=bold";
    os << "];\n";
  }
  for (const auto& b : ir.cfg.blocks) {
    const Terminator& t = b.term;
    if (t.kind == TermKind::Br) {
      os << "  b" << b.id << " -> b" << t.target << ";\n";
    } else if (t.kind == TermKind::CondBr) {
      os << "  b" << b.id << " -> b" << t.target << " [label=\"T\"];\n";
      os << "  b" << b.id << " -> b" << t.else_target << " [label=\"F\"];\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace collapse
