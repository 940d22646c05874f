#include <fstream>
#include <map>
#include <sstream>

#include "collapse/parser.hpp"
#include "lexer.hpp"

namespace collapse {

using detail::Token;
using detail::TokenKind;

namespace {

enum class SymbolKind { ScalarParam, BufferParam, Local, Shared };

struct Symbol {
  SymbolKind kind;
  ScalarKind type;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  KernelModule parse_module() {
    KernelModule module;
    while (!at_end()) {
      KernelDef k = parse_kernel();
      for (const auto& existing : module.kernels) {
        if (existing.name == k.name) {
          throw ParseError(ParseErrorKind::Redeclaration, k.loc, "duplicate kernel '" + k.name + "'");
        }
      }
      module.kernels.push_back(std::move(k));
    }
    return module;
  }

 private:
  // ---------------------------------------------------------------- tokens
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool at_end() const { return peek().kind == TokenKind::End; }
  bool is_punct(std::string_view p, std::size_t ahead = 0) const {
    return peek(ahead).kind == TokenKind::Punct && peek(ahead).text == p;
  }
  bool is_ident(std::string_view name, std::size_t ahead = 0) const {
    return peek(ahead).kind == TokenKind::Ident && peek(ahead).text == name;
  }
  Token take() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  [[noreturn]] void fail(const std::string& msg, ParseErrorKind kind = ParseErrorKind::Syntax) const {
    throw ParseError(kind, peek().loc, msg);
  }
  [[noreturn]] static void fail_at(SourceLoc loc, const std::string& msg, ParseErrorKind kind) {
    throw ParseError(kind, loc, msg);
  }

  void expect_punct(std::string_view p) {
    if (!is_punct(p)) {
      fail("expected '" + std::string(p) + "' but found '" + describe(peek()) + "'");
    }
    ++pos_;
  }
  void expect_ident(std::string_view name) {
    if (!is_ident(name)) fail("expected '" + std::string(name) + "' but found '" + describe(peek()) + "'");
    ++pos_;
  }
  static std::string describe(const Token& t) { return t.kind == TokenKind::End ? "end of input" : t.text; }

  static bool is_keyword(std::string_view s) {
    static const char* kKeywords[] = {"__global__", "void", "global", "i32", "f32", "__shared__", "if",
                                      "else", "for", "return", "__syncthreads", "__syncwarp",
                                      "threadIdx", "blockIdx", "blockDim", "gridDim"};
    for (const char* k : kKeywords) {
      if (s == k) return true;
    }
    return false;
  }

  std::string take_name(const char* what) {
    if (peek().kind != TokenKind::Ident) fail(std::string("expected ") + what);
    const Token& t = peek();
    if (is_keyword(t.text)) fail("'" + t.text + "' is a reserved word");
    if (t.text.rfind("__", 0) == 0) fail("identifiers starting with '__' are reserved");
    return take().text;
  }

  bool at_type() const { return is_ident("i32") || is_ident("f32"); }
  ScalarKind take_type() {
    if (is_ident("i32")) {
      ++pos_;
      return ScalarKind::I32;
    }
    if (is_ident("f32")) {
      ++pos_;
      return ScalarKind::F32;
    }
    fail("expected a type (i32 or f32)");
  }

  // ---------------------------------------------------------------- scopes
  const Symbol* lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }
  void declare(SourceLoc loc, const std::string& name, Symbol sym) {
    if (lookup(name) != nullptr) {
      fail_at(loc, "redeclaration of '" + name + "'", ParseErrorKind::Redeclaration);
    }
    scopes_.back().emplace(name, sym);
  }

  // ---------------------------------------------------------------- kernels
  KernelDef parse_kernel() {
    KernelDef k;
    k.loc = peek().loc;
    expect_ident("__global__");
    expect_ident("void");
    k.name = take_name("kernel name");
    expect_punct("(");
    scopes_.clear();
    scopes_.emplace_back();
    if (!is_punct(")")) {
      while (true) {
        SourceLoc loc = peek().loc;
        Param p;
        if (is_ident("global")) {
          ++pos_;
          p.type.is_buffer = true;
          p.type.elem = take_type();
          expect_punct("*");
        } else {
          p.type.elem = take_type();
        }
        p.name = take_name("parameter name");
        declare(loc, p.name, {p.type.is_buffer ? SymbolKind::BufferParam : SymbolKind::ScalarParam, p.type.elem});
        k.params.push_back(std::move(p));
        if (is_punct(",")) {
          ++pos_;
          continue;
        }
        break;
      }
    }
    expect_punct(")");
    k.body = parse_block_body();
    scopes_.clear();
    return k;
  }

  StmtBlock parse_block_body() {
    expect_punct("{");
    scopes_.emplace_back();
    StmtBlock out;
    while (!is_punct("}")) {
      if (at_end()) fail("unexpected end of input, expected '}'");
      out.push_back(parse_stmt());
    }
    ++pos_;
    scopes_.pop_back();
    return out;
  }

  // Body of if/for: a braced block or a single statement, in its own scope.
  StmtBlock parse_sub_body() {
    if (is_punct("{")) return parse_block_body();
    scopes_.emplace_back();
    StmtBlock out;
    out.push_back(parse_stmt());
    scopes_.pop_back();
    return out;
  }

  static std::shared_ptr<Stmt> new_stmt(StmtKind kind, SourceLoc loc) {
    auto s = std::make_shared<Stmt>();
    s->kind = kind;
    s->loc = loc;
    return s;
  }

  StmtPtr parse_stmt() {
    SourceLoc loc = peek().loc;
    if (is_punct("{")) {
      auto s = new_stmt(StmtKind::Block, loc);
      s->body = parse_block_body();
      return s;
    }
    if (is_ident("if")) return parse_if();
    if (is_ident("for")) return parse_for();
    if (is_ident("return")) {
      ++pos_;
      expect_punct(";");
      return new_stmt(StmtKind::Return, loc);
    }
    if (is_ident("__syncthreads") || is_ident("__syncwarp")) {
      bool block = peek().text == "__syncthreads";
      ++pos_;
      expect_punct("(");
      if (!block && !is_punct(")")) {
        ExprPtr mask = parse_expr();
        check_mask(loc, mask);
      }
      expect_punct(")");
      expect_punct(";");
      return new_stmt(block ? StmtKind::SyncThreads : StmtKind::SyncWarp, loc);
    }
    if (is_ident("__shared__")) {
      auto s = parse_shared();
      expect_punct(";");
      return s;
    }
    if (at_type()) {
      auto s = parse_decl();
      expect_punct(";");
      return s;
    }
    if (peek().kind == TokenKind::Ident && (peek().text == "__grid_sync" || peek().text == "grid_sync")) {
      fail("unsupported feature: grid-level synchronization is not supported", ParseErrorKind::Unsupported);
    }
    auto s = parse_assign();
    expect_punct(";");
    return s;
  }

  StmtPtr parse_if() {
    SourceLoc loc = peek().loc;
    expect_ident("if");
    expect_punct("(");
    auto s = new_stmt(StmtKind::If, loc);
    s->value = parse_expr();
    expect_punct(")");
    s->then_body = parse_sub_body();
    if (is_ident("else")) {
      ++pos_;
      s->has_else = true;
      if (is_ident("if")) {
        s->else_body.push_back(parse_if());
      } else {
        s->else_body = parse_sub_body();
      }
    }
    return s;
  }

  StmtPtr parse_for() {
    SourceLoc loc = peek().loc;
    expect_ident("for");
    expect_punct("(");
    scopes_.emplace_back();
    auto s = new_stmt(StmtKind::For, loc);
    if (!is_punct(";")) s->for_init = at_type() ? parse_decl() : parse_assign();
    expect_punct(";");
    if (is_punct(";")) fail("for loop requires a condition");
    s->value = parse_expr();
    expect_punct(";");
    if (!is_punct(")")) s->for_step = parse_assign();
    expect_punct(")");
    s->body = parse_sub_body();
    scopes_.pop_back();
    return s;
  }

  StmtPtr parse_shared() {
    SourceLoc loc = peek().loc;
    expect_ident("__shared__");
    auto s = new_stmt(StmtKind::DeclShared, loc);
    s->decl_type = take_type();
    SourceLoc name_loc = peek().loc;
    s->name = take_name("shared array name");
    expect_punct("[");
    SourceLoc len_loc = peek().loc;
    if (peek().kind != TokenKind::Int || !is_punct("]", 1)) {
      fail_at(len_loc, "shared array '" + s->name + "' must have a compile-time constant length",
              ParseErrorKind::NonConstantShared);
    }
    std::int64_t len = take().int_value;
    if (len <= 0) {
      fail_at(len_loc, "shared array length must be positive", ParseErrorKind::NonConstantShared);
    }
    s->shared_length = static_cast<int>(len);
    expect_punct("]");
    declare(name_loc, s->name, {SymbolKind::Shared, s->decl_type});
    return s;
  }

  StmtPtr parse_decl() {
    SourceLoc loc = peek().loc;
    auto s = new_stmt(StmtKind::DeclLocal, loc);
    s->decl_type = take_type();
    SourceLoc name_loc = peek().loc;
    s->name = take_name("variable name");
    if (is_punct("[")) {
      fail("local arrays are not supported; use __shared__ for arrays", ParseErrorKind::Unsupported);
    }
    if (is_punct("=")) {
      ++pos_;
      s->value = parse_expr();
    }
    declare(name_loc, s->name, {SymbolKind::Local, s->decl_type});
    return s;
  }

  StmtPtr parse_assign() {
    SourceLoc loc = peek().loc;
    auto s = new_stmt(StmtKind::Assign, loc);
    if (peek().kind != TokenKind::Ident) fail("expected a statement");
    std::string name = peek().text;
    const Symbol* sym = lookup(name);
    if (sym == nullptr) {
      if (is_keyword(name)) fail("expected a statement");
      fail("unknown identifier '" + name + "'", ParseErrorKind::UnknownIdentifier);
    }
    ++pos_;
    if (sym->kind == SymbolKind::BufferParam || sym->kind == SymbolKind::Shared) {
      expect_punct("[");
      ExprPtr idx = parse_expr();
      require_int(loc, idx, "array index");
      expect_punct("]");
      s->target = ex::index(name, sym->type, idx);
    } else if (sym->kind == SymbolKind::ScalarParam) {
      fail_at(loc, "cannot assign to parameter '" + name + "'", ParseErrorKind::Type);
    } else {
      s->target = ex::var(name, sym->type);
    }

    static const std::pair<const char*, AssignOp> kOps[] = {
        {"=", AssignOp::Set},    {"+=", AssignOp::Add}, {"-=", AssignOp::Sub},  {"*=", AssignOp::Mul},
        {"/=", AssignOp::Div},   {"%=", AssignOp::Rem}, {"<<=", AssignOp::Shl}, {">>=", AssignOp::Shr},
        {"&=", AssignOp::And},   {"|=", AssignOp::Or},  {"^=", AssignOp::Xor},
    };
    if (is_punct("++") || is_punct("--")) {
      s->assign_op = peek().text == "++" ? AssignOp::Add : AssignOp::Sub;
      ++pos_;
      s->value = ex::int_lit(1);
      return s;
    }
    bool found = false;
    for (const auto& [text, op] : kOps) {
      if (is_punct(text)) {
        s->assign_op = op;
        found = true;
        break;
      }
    }
    if (!found) fail("expected assignment operator but found '" + describe(peek()) + "'");
    ++pos_;
    s->value = parse_expr();
    if (s->assign_op == AssignOp::Rem || s->assign_op == AssignOp::Shl || s->assign_op == AssignOp::Shr ||
        s->assign_op == AssignOp::And || s->assign_op == AssignOp::Or || s->assign_op == AssignOp::Xor) {
      if (s->target->type != ScalarKind::I32 || s->value->type != ScalarKind::I32) {
        fail_at(loc, "integer operator applied to f32", ParseErrorKind::Type);
      }
    }
    return s;
  }

  // ---------------------------------------------------------------- exprs
  static void require_int(SourceLoc loc, const ExprPtr& e, const char* what) {
    if (e->type != ScalarKind::I32) fail_at(loc, std::string(what) + " must be i32", ParseErrorKind::Type);
  }

  static bool is_full_mask(const ExprPtr& e) {
    if (e->kind == ExprKind::IntLit) return e->int_value == -1;
    if (e->kind == ExprKind::Unary && e->unary == UnaryOp::Neg && e->operands[0]->kind == ExprKind::IntLit) {
      return e->operands[0]->int_value == 1;
    }
    return false;
  }
  static void check_mask(SourceLoc loc, const ExprPtr& mask) {
    if (!is_full_mask(mask)) {
      fail_at(loc, "dynamic mask unsupported: warp collectives require the all-lanes mask (-1 or 0xffffffff)",
              ParseErrorKind::DynamicMask);
    }
  }

  ExprPtr parse_expr() { return parse_binary(0); }

  struct OpInfo {
    const char* text;
    BinaryOp op;
    int prec;
  };

  static const OpInfo* find_op(const Token& t) {
    static const OpInfo kOps[] = {
        {"||", BinaryOp::LogOr, 1}, {"&&", BinaryOp::LogAnd, 2}, {"|", BinaryOp::BitOr, 3},
        {"^", BinaryOp::BitXor, 4}, {"&", BinaryOp::BitAnd, 5},  {"==", BinaryOp::Eq, 6},
        {"!=", BinaryOp::Ne, 6},    {"<", BinaryOp::Lt, 7},      {"<=", BinaryOp::Le, 7},
        {">", BinaryOp::Gt, 7},     {">=", BinaryOp::Ge, 7},     {"<<", BinaryOp::Shl, 8},
        {">>", BinaryOp::Shr, 8},   {"+", BinaryOp::Add, 9},     {"-", BinaryOp::Sub, 9},
        {"*", BinaryOp::Mul, 10},   {"/", BinaryOp::Div, 10},    {"%", BinaryOp::Rem, 10},
    };
    if (t.kind != TokenKind::Punct) return nullptr;
    for (const auto& info : kOps) {
      if (t.text == info.text) return &info;
    }
    return nullptr;
  }

  ExprPtr parse_binary(int min_prec) {
    ExprPtr lhs = parse_unary();
    while (true) {
      const OpInfo* info = find_op(peek());
      if (info == nullptr || info->prec <= min_prec) break;
      SourceLoc loc = peek().loc;
      ++pos_;
      ExprPtr rhs = parse_binary(info->prec);
      switch (info->op) {
        case BinaryOp::Rem:
        case BinaryOp::Shl:
        case BinaryOp::Shr:
        case BinaryOp::BitAnd:
        case BinaryOp::BitOr:
        case BinaryOp::BitXor:
          if (lhs->type != ScalarKind::I32 || rhs->type != ScalarKind::I32) {
            fail_at(loc, std::string("operator '") + info->text + "' requires i32 operands", ParseErrorKind::Type);
          }
          break;
        default:
          break;
      }
      lhs = ex::binary(info->op, lhs, rhs);
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    SourceLoc loc = peek().loc;
    if (is_punct("-")) {
      ++pos_;
      return ex::unary(UnaryOp::Neg, parse_unary());
    }
    if (is_punct("!")) {
      ++pos_;
      return ex::unary(UnaryOp::Not, parse_unary());
    }
    if (is_punct("~")) {
      ++pos_;
      ExprPtr e = parse_unary();
      require_int(loc, e, "operand of '~'");
      return ex::unary(UnaryOp::BitNot, e);
    }
    if (is_punct("(") && (is_ident("i32", 1) || is_ident("f32", 1)) && is_punct(")", 2)) {
      ++pos_;
      ScalarKind to = take_type();
      expect_punct(")");
      return ex::cast(to, parse_unary());
    }
    return parse_primary();
  }

  ExprPtr parse_builtin_dim(Builtin which) {
    ++pos_;
    expect_punct(".");
    if (peek().kind != TokenKind::Ident) fail("expected '.x'");
    if (peek().text != "x") {
      fail("unsupported feature: only the x dimension of thread/block indices is modeled",
           ParseErrorKind::Unsupported);
    }
    ++pos_;
    return ex::builtin(which);
  }

  std::vector<ExprPtr> parse_call_args() {
    expect_punct("(");
    std::vector<ExprPtr> args;
    if (!is_punct(")")) {
      while (true) {
        args.push_back(parse_expr());
        if (is_punct(",")) {
          ++pos_;
          continue;
        }
        break;
      }
    }
    expect_punct(")");
    return args;
  }

  ExprPtr parse_collective(CollectiveKind kind, bool mask_required, SourceLoc loc, const std::string& fname) {
    std::vector<ExprPtr> args = parse_call_args();
    std::size_t value_args = kind == CollectiveKind::ShflDown ? 2 : 1;
    bool explicit_mask = false;
    if (args.size() == value_args + 1) {
      check_mask(loc, args.front());
      args.erase(args.begin());
      explicit_mask = true;
    } else if (args.size() != value_args || mask_required) {
      fail_at(loc, "wrong number of arguments to '" + fname + "'", ParseErrorKind::Syntax);
    }
    if (kind == CollectiveKind::ShflDown) require_int(loc, args[1], "shuffle offset");
    return ex::collective(kind, std::move(args), explicit_mask);
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    SourceLoc loc = t.loc;
    if (t.kind == TokenKind::Int) {
      std::int64_t v = take().int_value;
      return ex::int_lit(static_cast<std::int32_t>(static_cast<std::uint32_t>(v)));
    }
    if (t.kind == TokenKind::Float) return ex::float_lit(take().float_value);
    if (is_punct("(")) {
      ++pos_;
      ExprPtr e = parse_expr();
      expect_punct(")");
      return e;
    }
    if (t.kind != TokenKind::Ident) fail("expected an expression but found '" + describe(t) + "'");

    const std::string name = t.text;
    if (name == "threadIdx") return parse_builtin_dim(Builtin::ThreadIdx);
    if (name == "blockIdx") return parse_builtin_dim(Builtin::BlockIdx);
    if (name == "blockDim") return parse_builtin_dim(Builtin::BlockDim);
    if (name == "gridDim") return parse_builtin_dim(Builtin::GridDim);

    if (is_punct("(", 1)) {
      ++pos_;
      if (name == "shfl_down") return parse_collective(CollectiveKind::ShflDown, false, loc, name);
      if (name == "__shfl_down_sync") return parse_collective(CollectiveKind::ShflDown, true, loc, name);
      if (name == "vote_all") return parse_collective(CollectiveKind::VoteAll, false, loc, name);
      if (name == "__all_sync") return parse_collective(CollectiveKind::VoteAll, true, loc, name);
      if (name == "vote_any") return parse_collective(CollectiveKind::VoteAny, false, loc, name);
      if (name == "__any_sync") return parse_collective(CollectiveKind::VoteAny, true, loc, name);
      if (name == "__grid_sync" || name == "grid_sync") {
        fail_at(loc, "unsupported feature: grid-level synchronization is not supported",
                ParseErrorKind::Unsupported);
      }
      if (name == "__activemask" || name == "coalesced_threads") {
        fail_at(loc, "unsupported feature: dynamic activated-thread groups are not supported",
                ParseErrorKind::Unsupported);
      }
      fail_at(loc, "unknown function '" + name + "'", ParseErrorKind::UnknownIdentifier);
    }

    const Symbol* sym = lookup(name);
    if (sym == nullptr) fail("unknown identifier '" + name + "'", ParseErrorKind::UnknownIdentifier);
    ++pos_;
    if (sym->kind == SymbolKind::BufferParam || sym->kind == SymbolKind::Shared) {
      expect_punct("[");
      ExprPtr idx = parse_expr();
      require_int(loc, idx, "array index");
      expect_punct("]");
      return ex::index(name, sym->type, idx);
    }
    return ex::var(name, sym->type);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::map<std::string, Symbol>> scopes_;
};

}  // namespace

KernelModule parse_module(std::string_view source) {
  Parser parser(detail::tokenize(source));
  return parser.parse_module();
}

KernelModule parse_module_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_module(buf.str());
}

}  // namespace collapse
