#pragma once
// Abelian symmetry machinery: charge sectors, charge vectors, character
// functions, twirling, and the weight-class membership test for diagonal
// Hamiltonians.

#include <complex>
#include <map>
#include <vector>

#include "symlie/pauli_core.hpp"

namespace symlie {

// Sector traces indexed by total charge. value(q) = sum over basis states z
// in sector q of <z|A|z>; off-diagonal terms contribute nothing.
struct ChargeVector {
  std::map<Rational, Rational> sectors;

  Rational at(const Rational& q) const {
    auto it = sectors.find(q);
    return it == sectors.end() ? Rational(0) : it->second;
  }
  Rational trace() const {
    Rational s(0);
    for (const auto& [q, v] : sectors) s += v;
    return s;
  }
  bool zero() const {
    for (const auto& [q, v] : sectors)
      if (sgn(v) != 0) return false;
    return true;
  }
};

// m_q = number of computational basis states with total charge q.
std::map<Rational, long> sector_multiplicities(const SymmetrySpec& spec);

// Number of distinct achievable total charges on the first l sites
// (= l+1 for l qubits).
long irrep_count(const SymmetrySpec& spec, int l);

// irrep_count(n) - irrep_count(k): lower bound on dim h_n - dim h_k.
long dim_gap_bound(int n, int k, const SymmetrySpec& spec);

// dim of the symmetric operator subspace: sum_q m_q^2.
long full_symmetric_dim(const SymmetrySpec& spec);

// Requires a two-level spec (A is a qubit operator).
ChargeVector charge_vector(const PauliSumQ& a, const SymmetrySpec& spec);
ChargeVector charge_vector(const PauliSumF& a, const SymmetrySpec& spec);

// Tr(A (e^{i theta Z})^{x n}) = sum_q e^{i q theta} charge_vector(A)[q].
std::complex<double> character_function(const ChargeVector& cv, double theta);
std::complex<double> character_function(const PauliSumQ& a, const SymmetrySpec& spec,
                                        double theta);

// Group average over the diagonal U(1) action. A Pauli term survives iff its
// raising/lowering content is charge-balanced; surviving terms recombine into
// symmetric Pauli sums (exact in exact mode).
template <class C>
PauliSumT<C> twirl(const PauliSumT<C>& a, const SymmetrySpec& spec);

extern template PauliSumQ twirl<Rational>(const PauliSumQ&, const SymmetrySpec&);
extern template PauliSumF twirl<double>(const PauliSumF&, const SymmetrySpec&);

// Weight-class test for diagonal Hamiltonians against k-local symmetric
// generation: pass iff sum_{w(b)=y} c_b = 0 for every y in (k, n].
struct SkReport {
  bool pass = true;
  std::map<int, Rational> violations;  // weight y -> nonzero coefficient sum
};
SkReport s_k_test(const PauliSumQ& h_diag, int k);

// True iff charge_vector(H) is a real linear combination of the generators'
// charge vectors (exact solve).
bool charge_span_test(const PauliSumQ& h, const std::vector<PauliSumQ>& generators,
                      const SymmetrySpec& spec);

// Rank of the span of charge vectors of the k-local symmetric generator
// basis; equals k+1 for qubits.
long s_k_dimension(int n, int k, const SymmetrySpec& spec);

// Zeros of the single-site character sum_c e^{ic theta} on [0, 2pi), found
// exactly for equal-spaced charge lists and by grid+Newton refinement
// (|value| <= 1e-10) otherwise. flag = zeros exist and k < n.
struct TraceZeroReport {
  std::vector<double> zeros;
  bool exact = false;
  bool flag = false;
};
TraceZeroReport trace_zero_scan(const SymmetrySpec& spec, int k, int n);

// Walsh transform of a diagonal table: c_b = 2^{-n} sum_z (-1)^{b.z} h(z).
PauliSumQ diagonal_table_to_pauli(const std::vector<Rational>& h, int n);
PauliSumF diagonal_table_to_pauli(const std::vector<double>& h, int n);

}  // namespace symlie
