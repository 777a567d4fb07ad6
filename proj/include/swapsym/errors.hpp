#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace swapsym {

/// Malformed input: wrong dimensions, bad indices, invalid parameters.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A requested exponential moment or intermediate value is not finite.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Root finding failed to produce a unique answer.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> candidates = {})
      : std::runtime_error(what), candidates_(std::move(candidates)) {}

  const std::vector<double>& candidates() const noexcept { return candidates_; }

 private:
  std::vector<double> candidates_;
};

}  // namespace swapsym
