#pragma once
// Dynamical Lie algebra closure over symmetric Pauli sums: generator
// enumeration, bracket closure with provenance, membership, and dimension
// reports.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "symlie/pauli_core.hpp"

namespace symlie {

// Expression tree over generator indices recording how an element arose.
struct Expr {
  enum class Kind { leaf, bracket, scale, sum };
  Kind kind = Kind::leaf;
  int leaf = -1;                                  // generator index
  Rational factor = Rational(1);                  // scale nodes
  std::vector<std::shared_ptr<const Expr>> kids;  // bracket: 2, scale: 1, sum: any
};
using ExprPtr = std::shared_ptr<const Expr>;

ExprPtr expr_leaf(int index);
ExprPtr expr_bracket(ExprPtr a, ExprPtr b);
ExprPtr expr_scale(const Rational& f, ExprPtr a);
ExprPtr expr_sum(std::vector<ExprPtr> kids);

template <class C>
PauliSumT<C> evaluate_expr(const Expr& e, const std::vector<PauliSumT<C>>& gens);

extern template PauliSumQ evaluate_expr<Rational>(const Expr&, const std::vector<PauliSumQ>&);
extern template PauliSumF evaluate_expr<double>(const Expr&, const std::vector<PauliSumF>&);

int expr_bracket_depth(const Expr& e);

namespace detail {

// Row echelon over Pauli-string keys with expansion tracking: every stored
// row knows its expansion over the basis elements, so reductions yield
// synthesis coordinates. Exact rows pivot on the first string in canonical
// order; float rows pivot on the largest magnitude (relative tol 1e-10) and
// keep the fully reduced invariant.
template <class C>
class ClosureEchelon {
 public:
  using Terms = typename PauliSumT<C>::Terms;

  // Candidate becomes element #elem_index when independent.
  bool insert(const PauliSumT<C>& cand, std::size_t elem_index);

  struct Reduction {
    bool member = false;
    double residual_scale = 0;              // ||residual||_1
    Terms residual;
    std::map<std::size_t, C> coordinates;   // over element indices
  };
  Reduction reduce(const PauliSumT<C>& v) const;

  std::size_t rank() const { return rows_.size(); }

  // Row count per x-sector for single-sector rows (fullness pruning).
  const std::map<std::uint64_t, long>& sector_ranks() const { return sector_ranks_; }

 private:
  struct Row {
    Terms v;
    PauliString pivot;
    std::map<std::size_t, C> expansion;  // row = sum expansion[i] * element_i
  };
  void eliminate(Terms& v, const C& lambda, const Row& row,
                 std::map<std::size_t, C>* coords) const;

  std::vector<Row> rows_;
  std::map<PauliString, std::size_t, CanonicalLess> pivots_;
  std::map<std::uint64_t, long> sector_ranks_;
};

}  // namespace detail

template <class C>
struct MemberReport {
  bool member = false;
  C residual = CoeffTraits<C>::zero();   // 1-norm of the unreduced remainder
  std::vector<C> coordinates;            // over basis elements when member
};

template <class C>
class LieBasisT {
 public:
  int n() const { return n_; }
  Mode mode() const { return CoeffTraits<C>::mode; }
  bool closed() const { return closed_; }
  std::size_t dimension() const { return elements_.size(); }
  const std::vector<PauliSumT<C>>& generators() const { return generators_; }
  const std::vector<PauliSumT<C>>& elements() const { return elements_; }
  const std::vector<ExprPtr>& provenance() const { return provenance_; }
  const SymmetrySpec& spec() const { return spec_; }

  // Orthogonal projection onto span(elements); member <=> residual 0
  // (exact) or 1-norm below 1e-10 * ||H||_1 (float).
  MemberReport<C> member(const PauliSumT<C>& h) const;

  ExprPtr provenance_expression(std::size_t index) const;

 private:
  template <class C2>
  friend LieBasisT<C2> close(const std::vector<PauliSumT<C2>>& generators,
                             const SymmetrySpec& spec, std::optional<long> max_dim);
  int n_ = 0;
  bool closed_ = false;
  SymmetrySpec spec_;
  std::vector<PauliSumT<C>> generators_;
  std::vector<PauliSumT<C>> elements_;
  std::vector<ExprPtr> provenance_;
  detail::ClosureEchelon<C> echelon_;
};

using LieBasis = LieBasisT<Rational>;
using LieBasisF = LieBasisT<double>;

// Smallest bracket-closed real space containing the generators. Breadth
// first: every element against every original generator, then element pairs,
// until a full sweep adds nothing. Deterministic for a fixed generator
// order. Budget: default max_dim = full_symmetric_dim(spec).
template <class C>
LieBasisT<C> close(const std::vector<PauliSumT<C>>& generators, const SymmetrySpec& spec,
                   std::optional<long> max_dim = std::nullopt);

extern template LieBasis close<Rational>(const std::vector<PauliSumQ>&, const SymmetrySpec&,
                                         std::optional<long>);
extern template LieBasisF close<double>(const std::vector<PauliSumF>&, const SymmetrySpec&,
                                        std::optional<long>);

// Independent spanning set of the symmetric Hermitian operators supported on
// at most k sites: twirl of every Pauli string on every k-subset,
// deduplicated; includes the identity.
std::vector<PauliSumQ> klocal_symmetric_basis(int n, int k, const SymmetrySpec& spec);

struct DimensionRow {
  int k = 0;
  long dim = 0;
  long dim_traceless = 0;
  long s_k_dim = 0;
  long irreps = 0;
  bool gap_ok = true;  // dim(n) - dim(k) >= irrep gap against the top row
};
struct DimensionReport {
  int n = 0;
  std::vector<DimensionRow> rows;
  bool pairwise_ok = true;  // every pair k <= l meets the irrep-gap bound
};
DimensionReport dimension_report(int n, int kmin, int kmax, const SymmetrySpec& spec);

}  // namespace symlie
