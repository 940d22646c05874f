#pragma once

#include <bit>
#include <cstdint>

#include "collapse/ast.hpp"

namespace collapse {

/// Raw 32-bit cell; its interpretation comes from the static type.
using Bits = std::uint32_t;

inline Bits from_i32(std::int32_t v) { return static_cast<Bits>(v); }
inline Bits from_f32(float v) { return std::bit_cast<Bits>(v); }
inline std::int32_t as_i32(Bits b) { return static_cast<std::int32_t>(b); }
inline float as_f32(Bits b) { return std::bit_cast<float>(b); }

/// Value semantics shared by every engine:
///  - i32 arithmetic wraps; x / 0 and x % 0 yield 0; shift counts use the low 5 bits.
///  - mixed i32/f32 operands are promoted to f32;
///  - comparisons and logical operators yield i32 0/1;
///  - f32 -> i32 truncates, saturates out-of-range values and maps NaN to 0.
Bits convert(ScalarKind from, ScalarKind to, Bits v);
bool truthy(ScalarKind type, Bits v);
Bits apply_unary(UnaryOp op, ScalarKind operand, Bits v);
Bits apply_binary(BinaryOp op, ScalarKind lhs_type, Bits lhs, ScalarKind rhs_type, Bits rhs);

}  // namespace collapse
