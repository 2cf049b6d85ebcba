#pragma once
// Error taxonomy shared by all modules; the CLI maps these to exit codes
// (validation 1, budget 2, verification 3).

#include <stdexcept>
#include <string>

namespace symlie {

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& m) : std::runtime_error(m) {}
};

struct BudgetError : std::runtime_error {
  explicit BudgetError(const std::string& m) : std::runtime_error(m) {}
};

struct RoutingError : ValidationError {
  using ValidationError::ValidationError;
};

struct VerificationError : std::runtime_error {
  explicit VerificationError(const std::string& m) : std::runtime_error(m) {}
};

// Identities that must hold by construction; reaching this is a bug.
struct InternalError : std::logic_error {
  explicit InternalError(const std::string& m) : std::logic_error(m) {}
};

}  // namespace symlie
