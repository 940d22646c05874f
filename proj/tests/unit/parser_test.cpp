#include <gtest/gtest.h>

#include "collapse/parser.hpp"
#include "corpus.hpp"

namespace collapse {
namespace {

constexpr const char* kMinimal = "__global__ void k(global i32* a){ a[threadIdx.x] = 1; }";

constexpr const char* kWarpSum = R"(
__global__ void warp_sum(global i32* data) {
  i32 val = data[threadIdx.x];
  if (threadIdx.x < 32) {
    for (i32 offset = 16; offset > 0; offset /= 2) {
      val += shfl_down(val, offset);
    }
    data[threadIdx.x] = val;
  }
}
)";

ParseError parse_error(const std::string& src) {
  try {
    parse_module(src);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no diagnostic for:\n" << src;
  return ParseError(ParseErrorKind::Syntax, {}, "");
}

std::string wrap(const std::string& body, const std::string& params = "global i32* a, i32 n") {
  return "__global__ void k(" + params + ") {\n" + body + "\n}\n";
}

TEST(Parser, MinimalKernel) {
  KernelModule m = parse_module(kMinimal);
  ASSERT_EQ(m.kernels.size(), 1U);
  const KernelDef& k = m.kernels[0];
  EXPECT_EQ(k.name, "k");
  ASSERT_EQ(k.params.size(), 1U);
  EXPECT_TRUE(k.params[0].type.is_buffer);
  EXPECT_EQ(k.params[0].type.elem, ScalarKind::I32);
  ASSERT_EQ(k.body.size(), 1U);
  EXPECT_EQ(k.body[0]->kind, StmtKind::Assign);
  EXPECT_EQ(k.body[0]->target->kind, ExprKind::Index);
}

TEST(Parser, WarpSumShape) {
  KernelModule m = parse_module(kWarpSum);
  const KernelDef& k = m.kernels.at(0);
  ASSERT_EQ(k.body.size(), 2U);
  const Stmt& branch = *k.body[1];
  ASSERT_EQ(branch.kind, StmtKind::If);
  ASSERT_FALSE(branch.then_body.empty());
  const Stmt& loop = *branch.then_body[0];
  ASSERT_EQ(loop.kind, StmtKind::For);
  ASSERT_EQ(loop.body.size(), 1U);
  const Stmt& acc = *loop.body[0];
  EXPECT_EQ(acc.kind, StmtKind::Assign);
  EXPECT_EQ(acc.assign_op, AssignOp::Add);
  EXPECT_TRUE(irx::contains_kind(acc.value, ExprKind::Collective));
}

TEST(Parser, NonFullMaskIsRejected) {
  ParseError e = parse_error(wrap("i32 r = vote_all(0xFF, n > 0);"));
  EXPECT_EQ(e.kind(), ParseErrorKind::DynamicMask);
  EXPECT_NE(std::string(e.what()).find("dynamic mask unsupported"), std::string::npos);
  EXPECT_EQ(parse_error(wrap("i32 r = __shfl_down_sync(n, 1, 1);")).kind(), ParseErrorKind::DynamicMask);
}

TEST(Parser, FullMaskSpellingsAreAccepted) {
  EXPECT_NO_THROW(parse_module(wrap("i32 r = __shfl_down_sync(0xffffffff, n, 1);")));
  EXPECT_NO_THROW(parse_module(wrap("i32 r = __all_sync(-1, n > 0);")));
  EXPECT_NO_THROW(parse_module(wrap("i32 r = __any_sync(0xffffffff, n > 0);")));
}

TEST(Parser, DiagnosticsCarryLineAndColumn) {
  ParseError e = parse_error("__global__ void k(global i32* a) {\n  a[0] = ;\n}\n");
  EXPECT_EQ(e.kind(), ParseErrorKind::Syntax);
  EXPECT_EQ(e.loc().line, 2);
  EXPECT_GT(e.loc().column, 1);
  EXPECT_EQ(std::string(e.what()).rfind("2:", 0), 0U);
}

TEST(Parser, UnknownIdentifier) {
  ParseError e = parse_error(wrap("a[0] = missing;"));
  EXPECT_EQ(e.kind(), ParseErrorKind::UnknownIdentifier);
  EXPECT_NE(e.message().find("missing"), std::string::npos);
}

TEST(Parser, ScopesEndWithTheirBlock) {
  EXPECT_EQ(parse_error(wrap("if (n > 0) { i32 x = 1; }\na[0] = x;")).kind(), ParseErrorKind::UnknownIdentifier);
  EXPECT_EQ(parse_error(wrap("for (i32 i = 0; i < n; i++) { }\na[0] = i;")).kind(),
            ParseErrorKind::UnknownIdentifier);
}

TEST(Parser, SharedLengthMustBeConstant) {
  EXPECT_EQ(parse_error(wrap("__shared__ i32 s[n];")).kind(), ParseErrorKind::NonConstantShared);
  EXPECT_NO_THROW(parse_module(wrap("__shared__ f32 s[64];\ns[threadIdx.x] = 1.0;")));
}

TEST(Parser, Redeclarations) {
  EXPECT_EQ(parse_error(wrap("i32 x = 1;\ni32 x = 2;")).kind(), ParseErrorKind::Redeclaration);
  EXPECT_EQ(parse_error(std::string(kMinimal) + kMinimal).kind(), ParseErrorKind::Redeclaration);
}

TEST(Parser, TypeErrors) {
  EXPECT_EQ(parse_error(wrap("a[1.5] = 1;")).kind(), ParseErrorKind::Type);
  EXPECT_EQ(parse_error(wrap("n = 1;\na = 2;")).kind(), ParseErrorKind::Type);
}

TEST(Parser, UnsupportedFeatures) {
  EXPECT_EQ(parse_error(wrap("__grid_sync();")).kind(), ParseErrorKind::Unsupported);
  EXPECT_EQ(parse_error(wrap("a[0] = __activemask();")).kind(), ParseErrorKind::Unsupported);
}

TEST(Parser, RejectsConstructsOutsideTheGrammar) {
  for (const char* body : {"goto out;", "switch (n) { }", "while (n > 0) { }", "a[0] = threadIdx.y;",
                           "a[0] = foo(1);", "i32 x = 1"}) {
    try {
      parse_module(wrap(body));
      ADD_FAILURE() << "accepted: " << body;
    } catch (const ParseError&) {
    }
  }
}

TEST(Printer, EmptyModuleIsEmptyText) { EXPECT_EQ(pretty_print(KernelModule{}), ""); }

TEST(Printer, MinimalRoundTrip) {
  KernelModule m = parse_module(kMinimal);
  const std::string text = pretty_print(m);
  KernelModule again = parse_module(text);
  EXPECT_TRUE(structurally_equal(m, again));
  EXPECT_EQ(pretty_print(again), text);
}

TEST(Printer, WarpSumRoundTrip) {
  KernelModule m = parse_module(kWarpSum);
  EXPECT_TRUE(structurally_equal(m, parse_module(pretty_print(m))));
}

TEST(Printer, CorpusRoundTripIsIdempotent) {
  for (const auto& name : testing::corpus_names()) {
    SCOPED_TRACE(name);
    KernelModule m = parse_module_file((testing::corpus_dir() / (name + ".spk")).string());
    const std::string once = pretty_print(m);
    KernelModule again = parse_module(once);
    EXPECT_TRUE(structurally_equal(m, again));
    EXPECT_EQ(pretty_print(again), once);
  }
}

TEST(Printer, ExpressionPrecedenceSurvives) {
  KernelModule m = parse_module(wrap("a[0] = (n + 1) * 2 - -n % 3 << 1;\na[1] = !(n < 2) || n & 4;"));
  EXPECT_TRUE(structurally_equal(m, parse_module(pretty_print(m))));
}

TEST(Parser, ProbesFailWithFeatureDiagnostics) {
  const auto probes = testing::corpus_dir() / "probes";
  EXPECT_THROW(parse_module_file((probes / "grid_sync.spk").string()), ParseError);
  EXPECT_THROW(parse_module_file((probes / "dynamic_mask.spk").string()), ParseError);
  EXPECT_THROW(parse_module_file((probes / "activemask.spk").string()), ParseError);
}

}  // namespace
}  // namespace collapse
