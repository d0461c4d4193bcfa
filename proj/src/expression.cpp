#include "blowup/expression.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <vector>

namespace blowup {

namespace {

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  RealFn run() {
    RealFn e = expr();
    skip_ws();
    if (at_ < s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  const std::string& s_;
  size_t at_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at offset " + std::to_string(at_), at_);
  }

  void skip_ws() {
    while (at_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[at_])))
      ++at_;
  }

  char peek() {
    skip_ws();
    return at_ < s_.size() ? s_[at_] : '\0';
  }

  bool consume(char c) {
    if (peek() == c) {
      ++at_;
      return true;
    }
    return false;
  }

  RealFn expr() {
    RealFn a = term();
    for (;;) {
      if (consume('+')) {
        RealFn b = term();
        a = [a, b](double u) { return a(u) + b(u); };
      } else if (consume('-')) {
        RealFn b = term();
        a = [a, b](double u) { return a(u) - b(u); };
      } else {
        return a;
      }
    }
  }

  RealFn term() {
    RealFn a = factor();
    for (;;) {
      if (consume('*')) {
        RealFn b = factor();
        a = [a, b](double u) { return a(u) * b(u); };
      } else if (consume('/')) {
        RealFn b = factor();
        a = [a, b](double u) { return a(u) / b(u); };
      } else {
        return a;
      }
    }
  }

  RealFn factor() {
    RealFn a = base();
    if (consume('^')) {
      RealFn b = factor();  // right associative
      return [a, b](double u) { return std::pow(a(u), b(u)); };
    }
    return a;
  }

  RealFn base() {
    const char c = peek();
    if (c == '\0') fail("expected a value");
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++at_;
      RealFn e = expr();
      if (!consume(')')) fail("expected ')'");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const size_t start = at_;
      std::string name;
      while (at_ < s_.size() &&
             std::isalpha(static_cast<unsigned char>(s_[at_])))
        name += s_[at_++];
      if (name == "u") return [](double u) { return u; };
      double (*fn)(double) = nullptr;
      if (name == "exp") fn = std::exp;
      else if (name == "log") fn = std::log;
      else if (name == "sin") fn = std::sin;
      else if (name == "cos") fn = std::cos;
      else if (name == "sqrt") fn = std::sqrt;
      if (!fn) {
        at_ = start;
        fail("unknown identifier '" + name + "'");
      }
      if (!consume('(')) fail("expected '(' after function name");
      RealFn e = expr();
      if (!consume(')')) fail("expected ')'");
      return [fn, e](double u) { return fn(e(u)); };
    }
    fail("expected a value");
  }

  RealFn number() {
    const size_t start = at_;
    while (at_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[at_])))
      ++at_;
    if (at_ < s_.size() && s_[at_] == '.') {
      ++at_;
      while (at_ < s_.size() &&
             std::isdigit(static_cast<unsigned char>(s_[at_])))
        ++at_;
    }
    if (at_ == start || (at_ == start + 1 && s_[start] == '.'))
      fail("malformed number");
    const double v = std::stod(s_.substr(start, at_ - start));
    return [v](double) { return v; };
  }
};

}  // namespace

RealFn parse_expression(const std::string& text) {
  return Parser(text).run();
}

}  // namespace blowup
