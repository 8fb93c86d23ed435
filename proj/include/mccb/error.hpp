#pragma once

#include <stdexcept>
#include <string>

namespace mccb {

/// Broad failure class, mapped one-to-one onto CLI exit codes.
enum class ErrorKind {
  config = 2,     // bad input, parse or IO failure
  numerical = 3,  // EM collapse, singular covariance block
  infeasible = 4  // singular or inconsistent reproduction problem
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), kind_(kind), module_(std::move(module)) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
  [[nodiscard]] const std::string& module() const noexcept { return module_; }
  [[nodiscard]] int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
  std::string module_;
};

inline Error config_error(std::string module, const std::string& what) {
  return {ErrorKind::config, std::move(module), what};
}

inline Error numerical_error(std::string module, const std::string& what) {
  return {ErrorKind::numerical, std::move(module), what};
}

inline Error infeasible_error(std::string module, const std::string& what) {
  return {ErrorKind::infeasible, std::move(module), what};
}

}  // namespace mccb
