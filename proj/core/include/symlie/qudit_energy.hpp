#pragma once
// Energy-conserving interactions on equal-gap qudits: interaction builders,
// the two-ancilla reduction of system-system couplings, exact decomposition
// of diagonal operators over level-difference products, synthesis of
// energy-conserving Hamiltonians over star + nearest-neighbor couplings with
// one ancilla qubit, and the dimension / closure report for the algebra of
// energy-conserving skew-Hermitian operators.

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "symlie/compiler.hpp"
#include "symlie/densesim.hpp"
#include "symlie/lie_closure.hpp"
#include "symlie/plan.hpp"

namespace symlie {

// n qudits with d equally spaced levels (gap per step), plus 0..2 trailing
// ancilla qubits whose |1> state sits one gap above |0>. Site 0 is the most
// significant index digit; ancillas occupy sites n .. n+ancillas-1.
struct QuditSpec {
  int n = 1;
  int d = 2;
  double gap = 1.0;
  int ancillas = 0;

  std::vector<int> dims() const;
  long dim() const;
  int sites() const { return n + ancillas; }
};

enum class QuditGenKind {
  hop_star,   // R^(l)_{j,a}: one quantum between system j and an ancilla
  hop_pair,   // R^(l,l')_{j,j'}: one quantum between systems j and j'
  z_level,    // Z^(l)_j = |l-1><l-1| - |l><l| on system j
  z_ancilla,  // Pauli Z on an ancilla qubit
};

struct QuditGen {
  QuditGenKind kind = QuditGenKind::z_ancilla;
  std::vector<int> sites;   // hop_star {j, a}; hop_pair {j, j'}; z {site}
  std::vector<int> levels;  // hop_star {l}; hop_pair {l, l'}; z_level {l}
  bool operator==(const QuditGen&) const = default;
  bool operator<(const QuditGen&) const;
};

std::string gen_name(const QuditGen& g);

struct QuditOperator {
  std::vector<int> dims;  // per-site dimensions, site 0 most significant
  Eigen::SparseMatrix<std::complex<double>> mat;
  bool hermitian = false;
};

// Builds the operator from triplet entries and verifies the Hermitian flag.
QuditOperator qudit_operator(std::vector<int> dims,
                             const std::vector<std::tuple<long, long, std::complex<double>>>& entries);
Matrix to_matrix(const QuditOperator& op);

QuditOperator build_interaction(const QuditSpec& spec, const QuditGen& gen);
QuditOperator intrinsic_hamiltonian(const QuditSpec& spec);

// True iff [op, H_tot] = 0 exactly: every nonzero entry connects basis states
// with equal total level sums.
bool check_energy_conserving(const QuditOperator& op, const QuditSpec& spec);

// Verifies R^(l,l')_{j,j'} Z_b = (1/2)[R^(l')_{j',b}, [R^(l)_{j,b}, Z_b]] on
// the minimal three-site space {d, d, 2} and returns the substitution data:
// on any Z_b eigenstate the nested bracket acts as the system-system coupling
// scaled by the eigenvalue.
struct TwoAncillaReduction {
  bool identity_ok = false;
  double max_abs_diff = 0;
  QuditOperator lhs;  // (1/2)[B, [A, Z_b]] on dims {d, d, 2}
  QuditOperator rhs;  // R^(l,l')_{j,j'} Z_b on the same space
  std::vector<QuditGen> primitives;  // A, B, Z_b with caller site labels
  ExprPtr provenance;                // tree over primitives evaluating to lhs
};
TwoAncillaReduction two_ancilla_reduce(const QuditSpec& spec, int j, int jp, int l, int lp);

// Coefficients of a diagonal table over per-site codes: key[j] = 0 keeps the
// identity at site j, key[j] = l >= 1 takes Z^(l)_j. The all-zero key carries
// the identity coefficient Tr(H)/Tr(I). Exact over rationals.
template <class C>
std::map<std::vector<int>, C> qudit_diag_decompose(const std::vector<C>& table, int n, int d);
template <class C>
std::vector<C> qudit_diag_reconstruct(const std::map<std::vector<int>, C>& coeffs, int n, int d);

extern template std::map<std::vector<int>, Rational> qudit_diag_decompose<Rational>(
    const std::vector<Rational>&, int, int);
extern template std::map<std::vector<int>, double> qudit_diag_decompose<double>(
    const std::vector<double>&, int, int);
extern template std::vector<Rational> qudit_diag_reconstruct<Rational>(
    const std::map<std::vector<int>, Rational>&, int, int);
extern template std::vector<double> qudit_diag_reconstruct<double>(
    const std::map<std::vector<int>, double>&, int, int);

// Evaluates a provenance tree over dense leaf matrices; bracket(A, B) is the
// Hermitian commutator i[A, B].
Matrix evaluate_expr_dense(const Expr& e, const std::vector<Matrix>& leaves);

struct QuditStep {
  QuditOperator ham;  // on the spec's full site list
  std::optional<QuditGen> gen;
  ExprPtr provenance;
  double duration = 0;
};

struct QuditPlan {
  QuditSpec spec;
  PlanLevel level = PlanLevel::hamiltonian;
  double epsilon = 0;
  std::string scheme = "exact";
  std::string primitive_set = "qudit-R-Za";
  std::vector<QuditGen> primitives;
  std::vector<QuditStep> steps;
  double phase = 0;
};

Matrix run_qudit_plan(const QuditPlan& plan);

// Compiles an energy-conserving Hamiltonian on the n-qudit system into a
// hamiltonian-level plan over {R^(l)_{j,a}, R^(l,l')_{j,j'}, Z_a} with one
// ancilla qubit: the plan's unitary acts as exp(-i h t) on the |0>_a sector.
// Diagonal content arrives through ancilla-closed chain brackets, off-diagonal
// content through bracket ladders of level hops dressed with diagonal
// projectors.
QuditPlan qudit_synthesize(const QuditOperator& h, const QuditSpec& spec, double t);

struct QuditExpandReport {
  QuditPlan plan;
  double model_error = 0;
  double measured_error = 0;
  double leakage = 0;
  long pulse_count = 0;
  int attempts = 0;
  std::vector<StepSchedule> schedules;
};
QuditExpandReport qudit_expand_to_pulses(const QuditPlan& plan, double epsilon,
                                         Scheme scheme = Scheme::trotter2);

struct QuditVerifyReport {
  double sector_distance = 0;
  double leakage = 0;
  double tolerance = 0;
  bool pass = false;
};
// Compares the plan's ancilla-|0> sector block against exp(-i target t).
QuditVerifyReport verify_qudit_plan(const QuditPlan& plan, const QuditOperator& target, double t,
                                    std::optional<double> tol = std::nullopt);

// Multiplicities of the total-energy sectors and the dimension sum m_E^2 of
// the energy-conserving algebra, checked against the Lie closure of the
// diagonal projectors with nearest-neighbor level hops (float reduction,
// cross-validated exactly on small instances).
struct EnergyAlgebraReport {
  std::vector<long> multiplicities;
  long dim = 0;
  bool closure_checked = false;  // float closure runs for d^n <= 32
  long closure_dim = 0;
  bool closure_ok = false;
  bool exact_checked = false;  // rational cross-check runs for d^n <= 12
  long exact_dim = 0;
};
EnergyAlgebraReport energy_algebra_dim(const QuditSpec& spec);

}  // namespace symlie
