#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "blowup/numerics.hpp"

namespace blowup {

/// Raised on malformed expression input; offset is the byte position of the
/// first character that could not be consumed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, size_t offset)
      : std::runtime_error(what), offset_(offset) {}
  size_t offset() const { return offset_; }

 private:
  size_t offset_;
};

/// Compiles an expression in the single variable `u` to an evaluator.
///
/// Grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := base ('^' factor)?
///   base   := number | 'u' | '(' expr ')' | func '(' expr ')'
///   func   := exp | log | sin | cos | sqrt
///
/// Whitespace is insignificant; numbers are plain decimal literals.
RealFn parse_expression(const std::string& text);

}  // namespace blowup
