#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace lens {

// Exact arithmetic for shutter durations and capture costs. Shutter speeds
// are quoted as rationals ("1/60") and cost sums must not drift, so all cost
// accounting stays in Rational until the moment a report is written.
using Rational = boost::rational<std::int64_t>;

// Parses "p/q", an integer "n", or a plain decimal "0.25".
// Throws std::invalid_argument on malformed input or zero denominator.
Rational parse_rational(std::string_view text);

// Canonical textual form: "1/4", "1/60"; integral values render as "3".
std::string rational_to_string(const Rational& r);

double rational_to_double(const Rational& r);

// Decimal rendering, exact when the expansion terminates within max_places
// digits, rounded (half away from zero) otherwise. "2409/1000" -> "2.409".
std::string rational_to_decimal(const Rational& r, int max_places = 12);

}  // namespace lens
