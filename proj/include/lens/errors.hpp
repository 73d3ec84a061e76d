#pragma once

#include <stdexcept>
#include <string>

namespace lens {

// Exit-code mapping for the CLI: ConfigError -> 2, DataError -> 3,
// InternalError -> 4. Everything else is treated as internal.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct InternalError : std::runtime_error {
  explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lens
