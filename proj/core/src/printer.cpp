#include <cmath>
#include <cstdio>
#include <sstream>

#include "collapse/parser.hpp"

namespace collapse {

namespace {

int precedence(BinaryOp op) {
  switch (op) {
    case BinaryOp::LogOr: return 1;
    case BinaryOp::LogAnd: return 2;
    case BinaryOp::BitOr: return 3;
    case BinaryOp::BitXor: return 4;
    case BinaryOp::BitAnd: return 5;
    case BinaryOp::Eq:
    case BinaryOp::Ne: return 6;
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return 7;
    case BinaryOp::Shl:
    case BinaryOp::Shr: return 8;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 9;
    case BinaryOp::Mul:
    case BinaryOp::Div:
    case BinaryOp::Rem: return 10;
  }
  return 0;
}

const char* op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Rem: return "%";
    case BinaryOp::Shl: return "<<";
    case BinaryOp::Shr: return ">>";
    case BinaryOp::BitAnd: return "&";
    case BinaryOp::BitOr: return "|";
    case BinaryOp::BitXor: return "^";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::LogAnd: return "&&";
    case BinaryOp::LogOr: return "||";
  }
  return "?";
}

const char* assign_text(AssignOp op) {
  switch (op) {
    case AssignOp::Set: return "=";
    case AssignOp::Add: return "+=";
    case AssignOp::Sub: return "-=";
    case AssignOp::Mul: return "*=";
    case AssignOp::Div: return "/=";
    case AssignOp::Rem: return "%=";
    case AssignOp::Shl: return "<<=";
    case AssignOp::Shr: return ">>=";
    case AssignOp::And: return "&=";
    case AssignOp::Or: return "|=";
    case AssignOp::Xor: return "^=";
  }
  return "=";
}

std::string float_text(float v) {
  if (std::isnan(v)) return "(0.0 / 0.0)";
  if (std::isinf(v)) return v > 0 ? "(1.0 / 0.0)" : "(-1.0 / 0.0)";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  std::string s = buf;
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

// Precedence of a printed form; 11 = unary, 12 = primary.
int expr_prec(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Binary: return precedence(e.binary);
    case ExprKind::Unary:
    case ExprKind::Cast: return 11;
    case ExprKind::FloatLit: return e.float_value < 0 || std::isnan(e.float_value) || std::isinf(e.float_value) ? 11 : 12;
    default: return 12;
  }
}

void print(std::ostream& os, const Expr& e);

void print_operand(std::ostream& os, const Expr& e, int min_prec) {
  if (expr_prec(e) < min_prec) {
    os << '(';
    print(os, e);
    os << ')';
  } else {
    print(os, e);
  }
}

const char* builtin_text(Builtin b) {
  switch (b) {
    case Builtin::ThreadIdx: return "threadIdx.x";
    case Builtin::BlockIdx: return "blockIdx.x";
    case Builtin::BlockDim: return "blockDim.x";
    case Builtin::GridDim: return "gridDim.x";
  }
  return "?";
}

void print(std::ostream& os, const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLit:
      if (e.int_value < 0) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "0x%08x", static_cast<unsigned>(e.int_value));
        os << buf;
      } else {
        os << e.int_value;
      }
      return;
    case ExprKind::FloatLit:
      os << float_text(e.float_value);
      return;
    case ExprKind::Var:
      os << e.name;
      return;
    case ExprKind::Index:
    case ExprKind::LocalElem:
      os << e.name << '[';
      print(os, *e.operands[0]);
      os << ']';
      return;
    case ExprKind::Builtin:
      os << builtin_text(e.builtin);
      return;
    case ExprKind::Unary:
      os << (e.unary == UnaryOp::Neg ? "-" : e.unary == UnaryOp::Not ? "!" : "~");
      // Keep "- -x" from lexing as "--".
      if (e.unary == UnaryOp::Neg && e.operands[0]->kind == ExprKind::Unary &&
          e.operands[0]->unary == UnaryOp::Neg) {
        os << ' ';
      }
      print_operand(os, *e.operands[0], 11);
      return;
    case ExprKind::Cast:
      os << '(' << to_string(e.type) << ')';
      print_operand(os, *e.operands[0], 11);
      return;
    case ExprKind::Binary: {
      int p = precedence(e.binary);
      print_operand(os, *e.operands[0], p);
      os << ' ' << op_text(e.binary) << ' ';
      print_operand(os, *e.operands[1], p + 1);
      return;
    }
    case ExprKind::Collective: {
      const char* name = e.collective == CollectiveKind::ShflDown ? "shfl_down"
                         : e.collective == CollectiveKind::VoteAll ? "vote_all"
                                                                   : "vote_any";
      os << name << '(';
      if (e.explicit_mask) os << "0xffffffff, ";
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        if (i) os << ", ";
        print(os, *e.operands[i]);
      }
      os << ')';
      return;
    }
    case ExprKind::LaneShfl:
      os << "warp_shfl[__tx + ";
      print_operand(os, *e.operands[0], 10);
      os << ']';
      return;
    case ExprKind::LaneVote:
      os << (e.collective == CollectiveKind::VoteAll ? "all(warp_vote)" : "any(warp_vote)");
      return;
  }
}

void indent(std::ostream& os, int depth) {
  for (int i = 0; i < depth; ++i) os << "  ";
}

void print_block(std::ostream& os, const StmtBlock& body, int depth);

// Inline form used in for-headers (no trailing semicolon).
void print_simple(std::ostream& os, const Stmt& s) {
  if (s.kind == StmtKind::DeclLocal) {
    os << to_string(s.decl_type) << ' ' << s.name;
    if (s.value) {
      os << " = ";
      print(os, *s.value);
    }
    return;
  }
  print(os, *s.target);
  os << ' ' << assign_text(s.assign_op) << ' ';
  print(os, *s.value);
}

void print_stmt(std::ostream& os, const Stmt& s, int depth) {
  indent(os, depth);
  switch (s.kind) {
    case StmtKind::Assign:
    case StmtKind::DeclLocal:
      print_simple(os, s);
      os << ";\n";
      return;
    case StmtKind::DeclShared:
      os << "__shared__ " << to_string(s.decl_type) << ' ' << s.name << '[' << s.shared_length << "];\n";
      return;
    case StmtKind::If:
      os << "if (";
      print(os, *s.value);
      os << ") {\n";
      print_block(os, s.then_body, depth + 1);
      indent(os, depth);
      os << '}';
      if (s.has_else) {
        os << " else {\n";
        print_block(os, s.else_body, depth + 1);
        indent(os, depth);
        os << '}';
      }
      os << '\n';
      return;
    case StmtKind::For:
      os << "for (";
      if (s.for_init) print_simple(os, *s.for_init);
      os << "; ";
      print(os, *s.value);
      os << "; ";
      if (s.for_step) print_simple(os, *s.for_step);
      os << ") {\n";
      print_block(os, s.body, depth + 1);
      indent(os, depth);
      os << "}\n";
      return;
    case StmtKind::Block:
      os << "{\n";
      print_block(os, s.body, depth + 1);
      indent(os, depth);
      os << "}\n";
      return;
    case StmtKind::SyncThreads:
      os << "__syncthreads();\n";
      return;
    case StmtKind::SyncWarp:
      os << "__syncwarp();\n";
      return;
    case StmtKind::Return:
      os << "return;\n";
      return;
  }
}

void print_block(std::ostream& os, const StmtBlock& body, int depth) {
  for (const auto& s : body) print_stmt(os, *s, depth);
}

}  // namespace

std::string print_expr(const Expr& expr) {
  std::ostringstream os;
  print(os, expr);
  return os.str();
}

std::string print_expr(const ExprPtr& expr) { return expr ? print_expr(*expr) : std::string(); }

std::string pretty_print(const KernelModule& module) {
  std::ostringstream os;
  for (std::size_t k = 0; k < module.kernels.size(); ++k) {
    const KernelDef& def = module.kernels[k];
    if (k) os << '\n';
    os << "__global__ void " << def.name << '(';
    for (std::size_t i = 0; i < def.params.size(); ++i) {
      const Param& p = def.params[i];
      if (i) os << ", ";
      if (p.type.is_buffer) {
        os << "global " << to_string(p.type.elem) << "* " << p.name;
      } else {
        os << to_string(p.type.elem) << ' ' << p.name;
      }
    }
    os << ") {\n";
    print_block(os, def.body, 1);
    os << "}\n";
  }
  return os.str();
}

}  // namespace collapse
