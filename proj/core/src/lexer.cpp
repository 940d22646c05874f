#include "lexer.hpp"

#include <array>
#include <cctype>
#include <cstdlib>

namespace collapse::detail {

namespace {

constexpr std::array<std::string_view, 20> kMultiCharPuncts = {
    "<<=", ">>=", "&&", "||", "==", "!=", "<=", ">=", "<<", ">>",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "++", "--",
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t pos = 0;
  int line = 1;
  int col = 1;

  auto advance = [&](std::size_t n) {
    for (std::size_t i = 0; i < n && pos < src.size(); ++i, ++pos) {
      if (src[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };

  while (pos < src.size()) {
    char c = src[pos];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && pos + 1 < src.size() && src[pos + 1] == '/') {
      while (pos < src.size() && src[pos] != '\n') advance(1);
      continue;
    }
    if (c == '/' && pos + 1 < src.size() && src[pos + 1] == '*') {
      SourceLoc start{line, col};
      advance(2);
      while (pos + 1 < src.size() && !(src[pos] == '*' && src[pos + 1] == '/')) advance(1);
      if (pos + 1 >= src.size()) throw ParseError(ParseErrorKind::Syntax, start, "unterminated comment");
      advance(2);
      continue;
    }

    Token tok;
    tok.loc = {line, col};
    if (is_ident_start(c)) {
      std::size_t end = pos;
      while (end < src.size() && is_ident_char(src[end])) ++end;
      tok.kind = TokenKind::Ident;
      tok.text = std::string(src.substr(pos, end - pos));
      advance(end - pos);
      out.push_back(std::move(tok));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t end = pos;
      if (c == '0' && pos + 1 < src.size() && (src[pos + 1] == 'x' || src[pos + 1] == 'X')) {
        end = pos + 2;
        while (end < src.size() && std::isxdigit(static_cast<unsigned char>(src[end]))) ++end;
        std::string digits(src.substr(pos + 2, end - pos - 2));
        if (digits.empty() || digits.size() > 8) {
          throw ParseError(ParseErrorKind::Syntax, tok.loc, "hex literal out of range");
        }
        tok.kind = TokenKind::Int;
        tok.hex = true;
        tok.int_value = static_cast<std::int64_t>(std::strtoull(digits.c_str(), nullptr, 16));
      } else {
        while (end < src.size() && std::isdigit(static_cast<unsigned char>(src[end]))) ++end;
        bool is_float = false;
        if (end < src.size() && src[end] == '.') {
          is_float = true;
          ++end;
          while (end < src.size() && std::isdigit(static_cast<unsigned char>(src[end]))) ++end;
        }
        if (end < src.size() && (src[end] == 'e' || src[end] == 'E')) {
          std::size_t e = end + 1;
          if (e < src.size() && (src[e] == '+' || src[e] == '-')) ++e;
          if (e < src.size() && std::isdigit(static_cast<unsigned char>(src[e]))) {
            is_float = true;
            end = e;
            while (end < src.size() && std::isdigit(static_cast<unsigned char>(src[end]))) ++end;
          }
        }
        std::string text(src.substr(pos, end - pos));
        if (end < src.size() && (src[end] == 'f' || src[end] == 'F')) {
          is_float = true;
          ++end;
        }
        if (is_float) {
          tok.kind = TokenKind::Float;
          tok.float_value = std::strtof(text.c_str(), nullptr);
        } else {
          tok.kind = TokenKind::Int;
          if (text.size() > 10) throw ParseError(ParseErrorKind::Syntax, tok.loc, "integer literal out of range");
          tok.int_value = std::strtoll(text.c_str(), nullptr, 10);
          if (tok.int_value > 2147483647LL) {
            throw ParseError(ParseErrorKind::Syntax, tok.loc, "integer literal out of range");
          }
        }
      }
      if (end < src.size() && is_ident_char(src[end])) {
        throw ParseError(ParseErrorKind::Syntax, tok.loc, "malformed number");
      }
      tok.text = std::string(src.substr(pos, end - pos));
      advance(end - pos);
      out.push_back(std::move(tok));
      continue;
    }

    tok.kind = TokenKind::Punct;
    bool matched = false;
    for (auto p : kMultiCharPuncts) {
      if (src.substr(pos, p.size()) == p) {
        tok.text = std::string(p);
        matched = true;
        break;
      }
    }
    if (!matched) {
      static constexpr std::string_view kSingle = "(){}[];,.=+-*/%<>!~&|^";
      if (kSingle.find(c) == std::string_view::npos) {
        throw ParseError(ParseErrorKind::Syntax, tok.loc, std::string("unexpected character '") + c + "'");
      }
      tok.text = std::string(1, c);
    }
    advance(tok.text.size());
    out.push_back(std::move(tok));
  }

  Token end;
  end.kind = TokenKind::End;
  end.loc = {line, col};
  out.push_back(end);
  return out;
}

}  // namespace collapse::detail
