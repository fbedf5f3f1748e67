#pragma once

#include <stdexcept>
#include <string>

namespace qtomo {

// Precondition or argument-domain violation.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// A numerical procedure gave up before meeting its stopping criterion.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Too many runs of a batch experiment failed.
class ExperimentError : public std::runtime_error {
 public:
  explicit ExperimentError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qtomo
