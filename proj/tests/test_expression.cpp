#include "blowup/expression.hpp"

#include <cmath>

#include "doctest.h"

using namespace blowup;

TEST_CASE("expression grammar evaluates arithmetic and functions") {
  CHECK(parse_expression("2+3*4")(0.0) == doctest::Approx(14.0));
  CHECK(parse_expression("(2+3)*4")(0.0) == doctest::Approx(20.0));
  CHECK(parse_expression("2^3^2")(0.0) == doctest::Approx(512.0));  // right assoc
  CHECK(parse_expression("u^2*(1+sin(u))")(2.0) ==
        doctest::Approx(4.0 * (1.0 + std::sin(2.0))));
  CHECK(parse_expression("exp(u)-1")(1.0) == doctest::Approx(std::exp(1.0) - 1));
  CHECK(parse_expression("sqrt(u)/2")(9.0) == doctest::Approx(1.5));
  CHECK(parse_expression("log(u)")(std::exp(2.0)) == doctest::Approx(2.0));
  CHECK(parse_expression(" 1.5 * u ")(2.0) == doctest::Approx(3.0));
  CHECK(parse_expression("10-2-3")(0.0) == doctest::Approx(5.0));  // left assoc
}

TEST_CASE("parse errors carry the offending offset") {
  try {
    parse_expression("u^");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 2);
  }

  try {
    parse_expression("2*(1+u");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 6);
  }

  CHECK_THROWS_AS(parse_expression("tan(u)"), ParseError);
  CHECK_THROWS_AS(parse_expression("1 2"), ParseError);
  CHECK_THROWS_AS(parse_expression(""), ParseError);
}
