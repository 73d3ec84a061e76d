#include "doctest.h"
#include "lens/rational.hpp"

using lens::Rational;

TEST_SUITE("rational") {

TEST_CASE("parse canonical shutter strings") {
  CHECK(lens::parse_rational("1/4") == Rational(1, 4));
  CHECK(lens::parse_rational("1/60") == Rational(1, 60));
  CHECK(lens::parse_rational("1/1000") == Rational(1, 1000));
  CHECK(lens::parse_rational("3") == Rational(3));
  CHECK(lens::parse_rational(" 2/8 ") == Rational(1, 4));
}

TEST_CASE("parse decimals exactly") {
  CHECK(lens::parse_rational("0.25") == Rational(1, 4));
  CHECK(lens::parse_rational("0.05") == Rational(1, 20));
  CHECK(lens::parse_rational("2.409") == Rational(2409, 1000));
  CHECK(lens::parse_rational("-0.5") == Rational(-1, 2));
}

TEST_CASE("parse rejects malformed input") {
  CHECK_THROWS_AS(lens::parse_rational(""), std::invalid_argument);
  CHECK_THROWS_AS(lens::parse_rational("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(lens::parse_rational("abc"), std::invalid_argument);
  CHECK_THROWS_AS(lens::parse_rational("1/2/3"), std::invalid_argument);
}

TEST_CASE("canonical text form") {
  CHECK(lens::rational_to_string(Rational(1, 60)) == "1/60");
  CHECK(lens::rational_to_string(Rational(2, 8)) == "1/4");
  CHECK(lens::rational_to_string(Rational(5)) == "5");
}

TEST_CASE("decimal rendering") {
  CHECK(lens::rational_to_decimal(Rational(2409, 1000)) == "2.409");
  CHECK(lens::rational_to_decimal(Rational(159, 1000)) == "0.159");
  CHECK(lens::rational_to_decimal(Rational(1, 1000)) == "0.001");
  CHECK(lens::rational_to_decimal(Rational(1, 60)) == "0.016666666667");
  CHECK(lens::rational_to_decimal(Rational(2, 3), 4) == "0.6667");
  CHECK(lens::rational_to_decimal(Rational(1999, 2000), 3) == "1");
  CHECK(lens::rational_to_decimal(Rational(-1, 4)) == "-0.25");
  CHECK(lens::rational_to_decimal(Rational(7)) == "7");
}

TEST_CASE("string round-trip is exact") {
  for (const Rational& r : {Rational(1, 4), Rational(1, 60), Rational(1, 1000), Rational(7, 3)})
    CHECK(lens::parse_rational(lens::rational_to_string(r)) == r);
}

}  // TEST_SUITE
