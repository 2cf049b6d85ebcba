#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "symlie/pauli_core.hpp"

namespace symlie {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class PlanLevel { hamiltonian, pulse };

std::string to_string(PlanLevel level);
PlanLevel plan_level_from_string(const std::string& s);

// One evolution step exp(-i duration H). Pulse steps name the primitive in
// `gen`; hamiltonian-level steps may carry any recorded symmetric sum plus a
// provenance tree over the plan's primitive catalog.
struct PlanStep {
  PauliSumF ham;
  std::optional<GenRef> gen;
  ExprPtr provenance;
  double duration = 0;
};

// Pulse program on n system sites plus ancillas appended after them. Steps
// apply in list order (first listed acts first on the state); the realized
// unitary is e^{i phase} U_m ... U_1.
struct CircuitPlan {
  int n = 0;
  std::vector<int> ancilla;
  PlanLevel level = PlanLevel::hamiltonian;
  double epsilon = 0;
  std::string primitive_set;
  std::string scheme;
  std::vector<GenRef> primitives;
  std::vector<PlanStep> steps;
  double phase = 0;

  int total_sites() const { return n + static_cast<int>(ancilla.size()); }
};

// Step helpers shared by compiler and qudit synthesis.
PlanStep pulse_step(const GenRef& gen, int total_sites, double duration);

}  // namespace symlie
