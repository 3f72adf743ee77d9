#pragma once

#include <stdexcept>
#include <string>

namespace symrc {

/// A parameter lies outside its documented domain.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value outside the alphabet an operation accepts (e.g. a bit that is not +-1).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear solve could not be completed (singular or indefinite system).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An experiment configuration is inconsistent. `key()` names the offending entry.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Integration produced a non-finite state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long step, const std::string& where)
      : std::runtime_error(where + ": non-finite state at step " + std::to_string(step)),
        step_(step) {}

  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace symrc
