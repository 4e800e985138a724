#include "lexer.hpp"

#include <cctype>
#include <charconv>

namespace grrw::rules {

namespace {

constexpr std::string_view kPuncts[] = {"-->", "<--", "->", "<-", "::", "==", "!=", "<=", ">=",
                                        "&&",  "||",  "{",  "}",  "(",  ")",  ";",  ":",  ",",
                                        ".",   "<",   ">",  "=",  "!",  "+",  "-",  "*",  "/",
                                        "%",   "[",   "]"};

}  // namespace

std::vector<Token> lex(std::string_view text, const std::string& file) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (text.substr(i, 2) == "//") {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (text.substr(i, 2) == "/*") {
      const SourcePos start{line, col};
      auto end = text.find("*/", i + 2);
      if (end == std::string_view::npos) {
        throw ParseError(file, start.line, start.column, "unterminated comment");
      }
      advance(end + 2 - i);
      continue;
    }
    Token tok;
    tok.pos = {line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      tok.kind = Tok::Ident;
      tok.text = std::string(text.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      bool is_double = false;
      if (j + 1 < text.size() && text[j] == '.' && std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        is_double = true;
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      const std::string_view num = text.substr(i, j - i);
      if (is_double) {
        tok.kind = Tok::Double;
        std::from_chars(num.data(), num.data() + num.size(), tok.double_value);
      } else {
        tok.kind = Tok::Int;
        auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), tok.int_value);
        if (ec != std::errc{}) throw ParseError(file, line, col, "integer literal out of range");
      }
      tok.text = std::string(num);
      advance(j - i);
    } else if (c == '"') {
      tok.kind = Tok::String;
      advance(1);
      while (true) {
        if (i >= text.size() || text[i] == '\n') {
          throw ParseError(file, tok.pos.line, tok.pos.column, "unterminated string literal");
        }
        if (text[i] == '"') {
          advance(1);
          break;
        }
        if (text[i] == '\\' && i + 1 < text.size()) {
          const char e = text[i + 1];
          switch (e) {
            case 'n':
              tok.text += '\n';
              break;
            case 't':
              tok.text += '\t';
              break;
            case '"':
            case '\\':
              tok.text += e;
              break;
            default:
              throw ParseError(file, line, col, std::string("unknown escape '\\") + e + "'");
          }
          advance(2);
          continue;
        }
        tok.text += text[i];
        advance(1);
      }
    } else {
      bool found = false;
      for (auto p : kPuncts) {
        if (text.substr(i, p.size()) == p) {
          tok.kind = Tok::Punct;
          tok.text = std::string(p);
          advance(p.size());
          found = true;
          break;
        }
      }
      if (!found) throw ParseError(file, line, col, std::string("unexpected character '") + c + "'");
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = Tok::End;
  end.pos = {line, col};
  out.push_back(end);
  return out;
}

}  // namespace grrw::rules
