#include "tce/lexer.hpp"

#include <cctype>

#include "tce/error.hpp"

namespace tce {

namespace {

bool word_start(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)); }

}  // namespace

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  bool line_start = true;  // nothing but whitespace seen on this line so far
  std::size_t i = 0;
  const std::size_t n = src.size();

  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k; ++j, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
        line_start = true;
      } else {
        ++col;
      }
    }
  };

  while (i < n) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '#' && line_start) {  // comment line
      while (i < n && src[i] != '\n') advance(1);
      continue;
    }
    line_start = false;
    Token t;
    t.line = line;
    t.col = col;

    if (c == '\\') {
      std::size_t j = i + 1;
      while (j < n && word_start(src[j])) ++j;
      if (j == i + 1)
        throw ParseError("stray '\\'", line, col);
      t.type = Tok::Word;
      t.backslashed = true;
      t.text = src.substr(i + 1, j - i - 1);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (word_start(c)) {
      std::size_t j = i;
      while (j < n) {
        if (word_char(src[j])) {
          ++j;
        } else if (src[j] == '_' && j + 1 < n && word_char(src[j + 1])) {
          // '_' joins identifier parts (map_scalar) but not subscripts (A_{\mu}).
          j += 2;
        } else {
          break;
        }
      }
      t.type = Tok::Word;
      t.text = src.substr(i, j - i);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.type = Tok::Number;
      t.text = src.substr(i, j - i);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < n && src[j] != '"' && src[j] != '\n') ++j;
      if (j >= n || src[j] != '"')
        throw ParseError("unterminated string", line, col);
      t.type = Tok::Str;
      t.text = src.substr(i + 1, j - i - 1);
      advance(j - i + 1);
      out.push_back(std::move(t));
      continue;
    }
    // two-character operators first
    if (i + 1 < n) {
      std::string two = src.substr(i, 2);
      if (two == "::" || two == ":=" || two == "->" || two == "**") {
        t.type = Tok::Op;
        t.text = two;
        advance(2);
        out.push_back(std::move(t));
        continue;
      }
    }
    static const std::string singles = "^_{}(),;.=+-*/$#";
    if (singles.find(c) != std::string::npos) {
      t.type = Tok::Op;
      t.text = std::string(1, c);
      advance(1);
      out.push_back(std::move(t));
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line, col);
  }

  Token end;
  end.type = Tok::End;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

}  // namespace tce
