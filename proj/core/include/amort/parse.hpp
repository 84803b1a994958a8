#ifndef AMORT_PARSE_HPP
#define AMORT_PARSE_HPP

#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "amort/assertion.hpp"

namespace amort {

class ParseError : public std::runtime_error {
public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& detail() const { return detail_; }

private:
  int line_;
  int column_;
  std::string detail_;
};

/// Names an assertion may refer to besides logical variables.
struct AssertionScope {
  std::set<std::string> program_vars;
  bool allow_ret = false;
};

/// Surface syntax:
///   assertion := clause ('\/' clause)*
///   clause    := ['exists' var+ '.'] part (';' part)*      (at most 3 parts)
/// With three parts they are pure ; heap ; resource (each may be empty).
/// With fewer, each part is classified by its content.
Assertion parse_assertion(std::string_view text, const AssertionScope& scope = {});

}  // namespace amort

#endif
