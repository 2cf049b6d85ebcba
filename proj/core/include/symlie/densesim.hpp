#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "symlie/pauli_core.hpp"
#include "symlie/plan.hpp"

namespace symlie {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr long kDenseBudget = 1L << 12;

// Site 0 is the most significant digit of the basis index throughout.
Matrix pauli_matrix(const PauliString& p, int n);
Matrix to_matrix(const PauliSumF& a);
Matrix to_matrix(const PauliSumQ& a);

double hermiticity_defect(const Matrix& h);
double unitarity_defect(const Matrix& u);

// e^{-i h t} by eigendecomposition; h is symmetrized first and the defect
// must stay below tolerance.
Matrix expm_unitary(const Matrix& h, double t);

Matrix run_plan(const CircuitPlan& plan);
Vector run_plan_state(const CircuitPlan& plan, const Vector& input);

struct AncillaBlock {
  Matrix block;        // <0...0|U|0...0> on the ancilla sites
  double leakage = 0;  // largest singular value of the off-sector column block
};

// Ancillas are the trailing `n_ancilla` factors of `dims`.
AncillaBlock ancilla_block(const Matrix& u, const std::vector<int>& dims, int n_ancilla);
AncillaBlock ancilla_block(const Matrix& u, int total_sites, int n_ancilla);

// min over phi of ||u - e^{i phi} v|| in operator norm. v must be unitary;
// u may be a near-isometric sector block.
double distance(const Matrix& u, const Matrix& v);

void write_matrix(const std::string& path, const Matrix& m);
Matrix read_matrix(const std::string& path);
std::string matrix_text(const Matrix& m);

}  // namespace symlie
