#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "collapse/error.hpp"

namespace collapse::detail {

enum class TokenKind { Ident, Int, Float, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  std::int64_t int_value = 0;
  bool hex = false;
  float float_value = 0.0F;
  SourceLoc loc;
};

std::vector<Token> tokenize(std::string_view source);

}  // namespace collapse::detail
