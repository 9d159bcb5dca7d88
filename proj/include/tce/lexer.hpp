#pragma once

#include <string>
#include <vector>

namespace tce {

enum class Tok { Word, Number, Str, Op, End };

struct Token {
  Tok type = Tok::End;
  std::string text;          // word/number/string content, or the operator itself
  bool backslashed = false;  // word was written \word ("\mu" and "mu" are the same name)
  int line = 1;
  int col = 1;
};

// Tokenize a script or expression. `#` at the start of a line is a comment;
// elsewhere it is the wildcard token. Throws ParseError on stray characters.
std::vector<Token> lex(const std::string& src);

}  // namespace tce
