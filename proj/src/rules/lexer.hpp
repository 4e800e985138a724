#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "grrw/error.hpp"
#include "grrw/rules/ast.hpp"

namespace grrw::rules {

enum class Tok { Ident, Int, Double, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;  // identifier, punctuation, or decoded string literal
  std::int64_t int_value = 0;
  double double_value = 0;
  SourcePos pos;

  bool is(std::string_view punct) const { return kind == Tok::Punct && text == punct; }
  bool is_word(std::string_view word) const { return kind == Tok::Ident && text == word; }
};

// `//` and `/* */` comments are skipped. Multi-character operators are
// matched longest first, so `x<-1` lexes as `x`, `<-`, `1`.
std::vector<Token> lex(std::string_view text, const std::string& file);

}  // namespace grrw::rules
