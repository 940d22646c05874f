#include <cmath>
#include <limits>

#include "collapse/scalar.hpp"

namespace collapse {

Bits convert(ScalarKind from, ScalarKind to, Bits v) {
  if (from == to) return v;
  if (to == ScalarKind::F32) return from_f32(static_cast<float>(as_i32(v)));
  float f = as_f32(v);
  if (std::isnan(f)) return 0;
  if (f >= 2147483648.0F) return from_i32(std::numeric_limits<std::int32_t>::max());
  if (f < -2147483648.0F) return from_i32(std::numeric_limits<std::int32_t>::min());
  return from_i32(static_cast<std::int32_t>(f));
}

bool truthy(ScalarKind type, Bits v) { return type == ScalarKind::F32 ? as_f32(v) != 0.0F : v != 0; }

Bits apply_unary(UnaryOp op, ScalarKind operand, Bits v) {
  switch (op) {
    case UnaryOp::Neg:
      if (operand == ScalarKind::F32) return from_f32(-as_f32(v));
      return 0U - v;
    case UnaryOp::Not:
      return truthy(operand, v) ? 0 : 1;
    case UnaryOp::BitNot:
      return ~v;
  }
  return 0;
}

namespace {

Bits int_binary(BinaryOp op, std::int32_t a, std::int32_t b) {
  const auto ua = static_cast<std::uint32_t>(a);
  const auto ub = static_cast<std::uint32_t>(b);
  switch (op) {
    case BinaryOp::Add: return ua + ub;
    case BinaryOp::Sub: return ua - ub;
    case BinaryOp::Mul: return ua * ub;
    case BinaryOp::Div:
      if (b == 0) return 0;
      if (a == std::numeric_limits<std::int32_t>::min() && b == -1) return from_i32(a);
      return from_i32(a / b);
    case BinaryOp::Rem:
      if (b == 0 || b == -1) return 0;
      return from_i32(a % b);
    case BinaryOp::Shl: return ua << (ub & 31U);
    case BinaryOp::Shr: return from_i32(a >> (ub & 31U));
    case BinaryOp::BitAnd: return ua & ub;
    case BinaryOp::BitOr: return ua | ub;
    case BinaryOp::BitXor: return ua ^ ub;
    case BinaryOp::Lt: return a < b;
    case BinaryOp::Le: return a <= b;
    case BinaryOp::Gt: return a > b;
    case BinaryOp::Ge: return a >= b;
    case BinaryOp::Eq: return a == b;
    case BinaryOp::Ne: return a != b;
    case BinaryOp::LogAnd: return a != 0 && b != 0;
    case BinaryOp::LogOr: return a != 0 || b != 0;
  }
  return 0;
}

Bits float_binary(BinaryOp op, float a, float b) {
  switch (op) {
    case BinaryOp::Add: return from_f32(a + b);
    case BinaryOp::Sub: return from_f32(a - b);
    case BinaryOp::Mul: return from_f32(a * b);
    case BinaryOp::Div: return from_f32(a / b);
    case BinaryOp::Lt: return a < b;
    case BinaryOp::Le: return a <= b;
    case BinaryOp::Gt: return a > b;
    case BinaryOp::Ge: return a >= b;
    case BinaryOp::Eq: return a == b;
    case BinaryOp::Ne: return a != b;
    case BinaryOp::LogAnd: return a != 0.0F && b != 0.0F;
    case BinaryOp::LogOr: return a != 0.0F || b != 0.0F;
    default: return 0;  // integer-only operators are rejected by the type checker
  }
}

}  // namespace

Bits apply_binary(BinaryOp op, ScalarKind lt, Bits l, ScalarKind rt, Bits r) {
  if (op == BinaryOp::LogAnd || op == BinaryOp::LogOr) {
    bool a = truthy(lt, l);
    bool b = truthy(rt, r);
    return op == BinaryOp::LogAnd ? (a && b) : (a || b);
  }
  if (lt == ScalarKind::F32 || rt == ScalarKind::F32) {
    return float_binary(op, as_f32(convert(lt, ScalarKind::F32, l)), as_f32(convert(rt, ScalarKind::F32, r)));
  }
  return int_binary(op, as_i32(l), as_i32(r));
}

}  // namespace collapse
