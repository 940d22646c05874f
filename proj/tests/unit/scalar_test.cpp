#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "collapse/scalar.hpp"

namespace collapse {
namespace {

constexpr auto I = ScalarKind::I32;
constexpr auto F = ScalarKind::F32;

std::int32_t ii(BinaryOp op, std::int32_t a, std::int32_t b) {
  return as_i32(apply_binary(op, I, from_i32(a), I, from_i32(b)));
}

TEST(Scalar, IntegerArithmeticWraps) {
  const auto max = std::numeric_limits<std::int32_t>::max();
  const auto min = std::numeric_limits<std::int32_t>::min();
  EXPECT_EQ(ii(BinaryOp::Add, max, 1), min);
  EXPECT_EQ(ii(BinaryOp::Sub, min, 1), max);
  EXPECT_EQ(ii(BinaryOp::Mul, 65536, 65536), 0);
  EXPECT_EQ(ii(BinaryOp::Div, min, -1), min);
  EXPECT_EQ(ii(BinaryOp::Rem, min, -1), 0);
  EXPECT_EQ(as_i32(apply_unary(UnaryOp::Neg, I, from_i32(min))), min);
}

TEST(Scalar, DivisionByZeroYieldsZero) {
  EXPECT_EQ(ii(BinaryOp::Div, 7, 0), 0);
  EXPECT_EQ(ii(BinaryOp::Rem, 7, 0), 0);
  EXPECT_EQ(ii(BinaryOp::Div, -7, 2), -3);
  EXPECT_EQ(ii(BinaryOp::Rem, -7, 2), -1);
}

TEST(Scalar, ShiftsUseTheLowFiveBits) {
  EXPECT_EQ(ii(BinaryOp::Shl, 1, 33), 2);
  EXPECT_EQ(ii(BinaryOp::Shr, -8, 1), -4);
  EXPECT_EQ(ii(BinaryOp::Shr, 8, 32), 8);
}

TEST(Scalar, MixedOperandsPromoteToFloat) {
  Bits r = apply_binary(BinaryOp::Add, I, from_i32(1), F, from_f32(0.5F));
  EXPECT_FLOAT_EQ(as_f32(r), 1.5F);
  r = apply_binary(BinaryOp::Lt, F, from_f32(0.5F), I, from_i32(1));
  EXPECT_EQ(as_i32(r), 1);
}

TEST(Scalar, ComparisonsAndLogicYieldZeroOrOne) {
  EXPECT_EQ(ii(BinaryOp::Lt, 3, 4), 1);
  EXPECT_EQ(ii(BinaryOp::Ge, 3, 4), 0);
  EXPECT_EQ(ii(BinaryOp::LogAnd, 5, -2), 1);
  EXPECT_EQ(ii(BinaryOp::LogOr, 0, 0), 0);
  EXPECT_EQ(as_i32(apply_unary(UnaryOp::Not, I, from_i32(9))), 0);
  EXPECT_EQ(as_i32(apply_unary(UnaryOp::Not, F, from_f32(0.0F))), 1);
  EXPECT_EQ(as_i32(apply_unary(UnaryOp::BitNot, I, from_i32(0))), -1);
}

TEST(Scalar, FloatToIntTruncatesAndSaturates) {
  auto cvt = [](float f) { return as_i32(convert(F, I, from_f32(f))); };
  EXPECT_EQ(cvt(2.9F), 2);
  EXPECT_EQ(cvt(-2.9F), -2);
  EXPECT_EQ(cvt(1e20F), std::numeric_limits<std::int32_t>::max());
  EXPECT_EQ(cvt(-1e20F), std::numeric_limits<std::int32_t>::min());
  EXPECT_EQ(cvt(std::numeric_limits<float>::quiet_NaN()), 0);
  EXPECT_EQ(cvt(std::numeric_limits<float>::infinity()), std::numeric_limits<std::int32_t>::max());
  EXPECT_FLOAT_EQ(as_f32(convert(I, F, from_i32(-3))), -3.0F);
  EXPECT_EQ(convert(I, I, 12345U), 12345U);
}

TEST(Scalar, FloatDivisionFollowsIeee) {
  Bits r = apply_binary(BinaryOp::Div, F, from_f32(1.0F), F, from_f32(0.0F));
  EXPECT_TRUE(std::isinf(as_f32(r)));
  EXPECT_TRUE(truthy(F, from_f32(-0.5F)));
  EXPECT_FALSE(truthy(F, from_f32(-0.0F)));
}

}  // namespace
}  // namespace collapse
