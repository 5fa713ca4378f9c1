#pragma once

#include <stdexcept>
#include <string>

namespace circsim {

// Invalid configuration / invalid declarative input (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace circsim
