#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace zpd {

// Input data that violates the record schema. Carries the offending line
// numbers (1-based; empty when the error is not tied to a file position)
// and the field name when one applies.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string message, std::vector<std::size_t> lines = {},
                  std::string field = {})
      : std::runtime_error(std::move(message)),
        lines_(std::move(lines)),
        field_(std::move(field)) {}

  const std::vector<std::size_t>& lines() const noexcept { return lines_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::vector<std::size_t> lines_;
  std::string field_;
};

// Bad run configuration: budget out of range, malformed stage plan, missing
// paths and the like.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace zpd
