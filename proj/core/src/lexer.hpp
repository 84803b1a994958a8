#ifndef AMORT_LEXER_HPP
#define AMORT_LEXER_HPP

#include <string>
#include <string_view>
#include <vector>

#include "amort/parse.hpp"

namespace amort::detail {

struct Token {
  enum class Kind { Ident, Meta, Number, Punct, Newline, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 1;
  int column = 1;

  bool is(std::string_view p) const { return (kind == Kind::Punct || kind == Kind::Ident) && text == p; }
};

/// Splits text into tokens; `#` starts a comment running to end of line.
std::vector<Token> tokenize(std::string_view text);

class TokenStream {
public:
  explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const;
  const Token& next();
  bool accept(std::string_view p);
  const Token& expect(std::string_view p);
  const Token& expect(Token::Kind kind, std::string_view what);
  void skip_newlines();
  [[noreturn]] void fail(const Token& at, const std::string& message) const;
  std::size_t position() const { return pos_; }
  void rewind(std::size_t pos) { pos_ = pos; }

private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

/// Parses one assertion starting at the stream position. Newlines end the
/// assertion unless the line ends with, or the next line starts with, one of
/// `\/`, `;`, `,`.
Assertion parse_assertion_tokens(TokenStream& ts, const AssertionScope& scope);

std::string describe(const Token& t);

}  // namespace amort::detail

#endif
