#pragma once

#include <optional>
#include <string>
#include <vector>

#include "symlie/errors.hpp"
#include "symlie/lie_closure.hpp"
#include "symlie/plan.hpp"

namespace symlie {

// Ordered distinct sites r_1..r_v; the last one may be an ancilla.
struct ChainSpec {
  std::vector<int> sites;
  int n_total = 0;
};

struct ChainResult {
  ExprPtr tree;                 // leaves index into `leaves`
  std::vector<GenRef> leaves;   // R pairs plus the closing Z
  PauliSumQ realized;           // = sign * (Z_{r1} - Z_{rv}) Z_{r1}...Z_{rv}
  PauliSumQ target;             // (Z_{r1} - Z_{rv}) Z_{r1}...Z_{rv}
  int sign = 0;                 // c_v
};

// Nested-bracket ladder hamiltonian for the chain; the closing operator
// (R or a Z-dressed R) and the sign are resolved symbolically and verified
// against the target before returning.
ChainResult chain_hamiltonian(const ChainSpec& chain);

/// Telescoping single-ancilla protocol: the returned hamiltonian-level plan's
// unitary U satisfies U(|psi> (x) |0>_a) = (e^{-i h t}|psi>) (x) |0>_a up to
// the recorded phase. The ancilla must be the site right after the system.
CircuitPlan diagonal_with_ancilla(const PauliSumQ& h_diag, int ancilla, double t);

struct UnsynthesizableError : ValidationError {
  explicit UnsynthesizableError(const std::string& what, double residual_norm)
      : ValidationError(what), residual(residual_norm) {}
  double residual;
};

// Single hamiltonian-level step for e^{-i h t}, with provenance equal to the
// member coordinates over the basis provenance trees. Every basis generator
// must be a recognizable primitive.
CircuitPlan synthesize_hamiltonian(const PauliSumQ& h, const LieBasis& basis, double t);

// Identifies R / T / Zlocal / Zmono sums (exact match including coefficient).
std::optional<GenRef> recognize_primitive(const PauliSumQ& a);

enum class Scheme { trotter2, groupcomm };
std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct StepSchedule {
  std::size_t step = 0;
  std::string node;    // provenance path of the approximated node
  std::string method;  // "strang" or "groupcomm"
  long reps = 0;
  double delta = 0;
  double model = 0;    // a-priori error contribution
};

struct ExpandReport {
  CircuitPlan plan;
  double model_error = 0;
  double measured_error = 0;
  double leakage = 0;
  long pulse_count = 0;
  int attempts = 1;
  std::vector<StepSchedule> schedules;
};

// Expands a hamiltonian-level plan into primitive pulses and certifies the
// result against the input plan with the dense simulator.
ExpandReport expand_to_pulses(const CircuitPlan& plan, double epsilon,
                              Scheme scheme = Scheme::trotter2);

enum class Geometry { none, chain_star, chain_zz };
std::string to_string(Geometry g);
Geometry geometry_from_string(const std::string& s);

bool geometry_allows(const GenRef& g, Geometry geo, int n, int ancilla_count);

// Rewrites a pulse-level plan so every step acts on geometry-allowed pairs;
// the implemented unitary (ancilla-sector unitary in star mode) is preserved
// exactly, with swap phases folded into the plan phase.
CircuitPlan swap_route(const CircuitPlan& plan, Geometry geometry);

// Pulse list realizing the two-site swap as e^{i pi/4}.SWAP: one R and one
// ZZ pulse; the phase contribution is returned through `phase`.
std::vector<PlanStep> swap_pulses(int j, int k, int total_sites, double& phase);

struct VerifyReport {
  double sector_distance = 0;
  double leakage = 0;
  double phase = 0;  // aligned global phase between plan and target
  double tolerance = 0;
  bool pass = false;
};

// Runs the plan in the dense simulator and compares the ancilla-|0> sector
// block against e^{-i target_h t}. Default tolerance: the declared epsilon
// for pulse plans, 1e-10 for hamiltonian-level plans.
VerifyReport verify_plan(const CircuitPlan& plan, const PauliSumF& target_h, double t,
                         std::optional<double> tol = std::nullopt);

}  // namespace symlie
