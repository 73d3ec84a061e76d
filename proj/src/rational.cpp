#include "lens/rational.hpp"

#include <cctype>
#include <cstdlib>
#include <stdexcept>

namespace lens {

namespace {

std::int64_t parse_int(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty integer field");
  std::size_t pos = 0;
  bool negative = false;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    pos = 1;
    if (pos == text.size()) throw std::invalid_argument("sign without digits");
  }
  std::int64_t value = 0;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw std::invalid_argument("bad digit in rational: '" + std::string(text) + "'");
    value = value * 10 + (c - '0');
  }
  return negative ? -value : value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = trim(text);
  if (s.empty()) throw std::invalid_argument("empty rational");
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    std::int64_t num = parse_int(s.substr(0, slash));
    std::int64_t den = parse_int(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator: '" + std::string(text) + "'");
    return Rational(num, den);
  }
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = s.substr(dot + 1);
    if (frac.size() > 15) throw std::invalid_argument("decimal too long: '" + std::string(text) + "'");
    bool negative = !whole.empty() && whole[0] == '-';
    std::int64_t w = whole.empty() || whole == "-" || whole == "+" ? 0 : parse_int(whole);
    std::int64_t f = frac.empty() ? 0 : parse_int(frac);
    if (f < 0) throw std::invalid_argument("bad decimal: '" + std::string(text) + "'");
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    std::int64_t magnitude = std::llabs(w) * scale + f;
    return Rational(negative || w < 0 ? -magnitude : magnitude, scale);
  }
  return Rational(parse_int(s), 1);
}

std::string rational_to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

double rational_to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

std::string rational_to_decimal(const Rational& r, int max_places) {
  std::int64_t num = r.numerator();
  std::int64_t den = r.denominator();
  std::string out;
  if (num < 0) {
    out.push_back('-');
    num = -num;
  }
  out += std::to_string(num / den);
  std::int64_t rem = num % den;
  if (rem == 0) return out;
  out.push_back('.');
  for (int i = 0; i < max_places && rem != 0; ++i) {
    rem *= 10;
    out.push_back(static_cast<char>('0' + rem / den));
    rem %= den;
  }
  if (rem != 0 && rem * 2 >= den) {
    // Round the final digit half away from zero, with carry.
    int i = static_cast<int>(out.size()) - 1;
    for (; i >= 0; --i) {
      if (out[i] == '.') continue;
      if (out[i] == '-') break;
      if (out[i] != '9') {
        ++out[i];
        break;
      }
      out[i] = '0';
    }
    if (i < 0 || out[i] == '-') out.insert(out.begin() + (i + 1), '1');
  }
  while (out.back() == '0') out.pop_back();
  if (out.back() == '.') out.pop_back();
  return out;
}

}  // namespace lens
