#pragma once

#include <charconv>
#include <stdexcept>
#include <string>

namespace lens {

// Shortest decimal text that round-trips the exact double value.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

}  // namespace lens
