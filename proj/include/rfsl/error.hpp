#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rfsl {

// Input outside the mathematical domain of an operation (odd N, delta >= 1/2, t = 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A sampler produced a NaN or infinity; the whole batch is discarded.
class NonFiniteState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Root bracketing failed because the function is not monotone on the search interval.
class NoRootError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& key,
             const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) +
                           (key.empty() ? std::string() : " [" + key + "]") + ": " + what),
        line_(line),
        key_(key) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  std::size_t line_;
  std::string key_;
};

}  // namespace rfsl
