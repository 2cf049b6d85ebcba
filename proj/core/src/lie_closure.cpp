#include "symlie/lie_closure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "symlie/errors.hpp"
#include "symlie/symmetry.hpp"

namespace symlie {

ExprPtr expr_leaf(int index) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::leaf;
  e->leaf = index;
  return e;
}
ExprPtr expr_bracket(ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::bracket;
  e->kids = {std::move(a), std::move(b)};
  return e;
}
ExprPtr expr_scale(const Rational& f, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::scale;
  e->factor = f;
  e->kids = {std::move(a)};
  return e;
}
ExprPtr expr_sum(std::vector<ExprPtr> kids) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::sum;
  e->kids = std::move(kids);
  return e;
}

template <class C>
PauliSumT<C> evaluate_expr(const Expr& e, const std::vector<PauliSumT<C>>& gens) {
  switch (e.kind) {
    case Expr::Kind::leaf:
      if (e.leaf < 0 || e.leaf >= static_cast<int>(gens.size()))
        throw ValidationError("provenance leaf index out of range");
      return gens[e.leaf];
    case Expr::Kind::bracket:
      return bracket(evaluate_expr(*e.kids[0], gens), evaluate_expr(*e.kids[1], gens));
    case Expr::Kind::scale: {
      auto v = evaluate_expr(*e.kids[0], gens);
      if constexpr (std::is_same_v<C, Rational>) {
        v *= e.factor;
      } else {
        v *= e.factor.get_d();
      }
      return v;
    }
    case Expr::Kind::sum: {
      if (e.kids.empty()) throw ValidationError("empty provenance sum");
      auto v = evaluate_expr(*e.kids[0], gens);
      for (std::size_t i = 1; i < e.kids.size(); ++i) v += evaluate_expr(*e.kids[i], gens);
      return v;
    }
  }
  throw InternalError("unreachable provenance kind");
}

template PauliSumQ evaluate_expr<Rational>(const Expr&, const std::vector<PauliSumQ>&);
template PauliSumF evaluate_expr<double>(const Expr&, const std::vector<PauliSumF>&);

int expr_bracket_depth(const Expr& e) {
  int d = 0;
  for (const auto& k : e.kids) d = std::max(d, expr_bracket_depth(*k));
  return d + (e.kind == Expr::Kind::bracket ? 1 : 0);
}

namespace detail {

namespace {

template <class C>
double norm1_terms(const typename PauliSumT<C>::Terms& t) {
  double s = 0;
  for (const auto& [p, c] : t) s += CoeffTraits<C>::abs_double(c);
  return s;
}

}  // namespace

template <class C>
void ClosureEchelon<C>::eliminate(Terms& v, const C& lambda, const Row& row,
                                  std::map<std::size_t, C>* coords) const {
  for (const auto& [p, c] : row.v) {
    auto [it, fresh] = v.try_emplace(p, CoeffTraits<C>::zero());
    it->second -= lambda * c;
    if constexpr (std::is_same_v<C, Rational>) {
      if (sgn(it->second) == 0) v.erase(it);
    } else {
      if (it->second == 0.0) v.erase(it);
    }
  }
  if (coords) {
    for (const auto& [idx, c] : row.expansion) {
      auto [it, fresh] = coords->try_emplace(idx, CoeffTraits<C>::zero());
      it->second += lambda * c;
      if (CoeffTraits<C>::is_zero(it->second)) coords->erase(it);
    }
  }
}

// Forward pass over keys in canonical order. Exact rows have pivot = leading
// key, so eliminations only introduce later keys. Float rows keep the fully
// reduced invariant, so keys introduced by an elimination are never pivots.
template <class C>
typename ClosureEchelon<C>::Reduction ClosureEchelon<C>::reduce(const PauliSumT<C>& v) const {
  Reduction red;
  red.residual = v.terms();
  auto it = red.residual.begin();
  while (it != red.residual.end()) {
    auto p = pivots_.find(it->first);
    if (p == pivots_.end()) {
      ++it;
      continue;
    }
    PauliString key = it->first;
    C lambda = it->second;
    eliminate(red.residual, lambda, rows_[p->second], &red.coordinates);
    it = red.residual.lower_bound(key);
  }
  red.residual_scale = norm1_terms<C>(red.residual);
  if constexpr (std::is_same_v<C, Rational>) {
    red.member = red.residual.empty();
  } else {
    red.member = red.residual_scale <= 1e-10 * std::max(v.norm1(), 1.0);
  }
  return red;
}

template <class C>
bool ClosureEchelon<C>::insert(const PauliSumT<C>& cand, std::size_t elem_index) {
  Reduction red = reduce(cand);
  if constexpr (std::is_same_v<C, Rational>) {
    if (red.residual.empty()) return false;
  } else {
    double scale = 0;
    for (const auto& [p, c] : cand.terms()) scale = std::max(scale, std::fabs(c));
    double rmax = 0;
    for (const auto& [p, c] : red.residual) rmax = std::max(rmax, std::fabs(c));
    if (rmax <= 1e-10 * std::max(scale, 1.0)) return false;
  }

  Row row;
  row.v = std::move(red.residual);
  if constexpr (std::is_same_v<C, Rational>) {
    row.pivot = row.v.begin()->first;
  } else {
    double best = -1;
    for (const auto& [p, c] : row.v) {
      if (std::fabs(c) > best) {
        best = std::fabs(c);
        row.pivot = p;
      }
    }
  }
  C lead = row.v.at(row.pivot);
  for (auto& [p, c] : row.v) c /= lead;
  // row = (candidate - sum lambda_i row_i)/lead and candidate is the new
  // element, so the expansion is (delta_new - reduction coords)/lead.
  row.expansion[elem_index] = CoeffTraits<C>::one() / lead;
  for (const auto& [idx, c] : red.coordinates) {
    C x = -c / lead;
    if (!CoeffTraits<C>::is_zero(x)) row.expansion[idx] = x;
  }

  if constexpr (!std::is_same_v<C, Rational>) {
    // Back-substitute the new pivot out of stored rows (reduced invariant).
    for (auto& r : rows_) {
      auto it = r.v.find(row.pivot);
      if (it == r.v.end()) continue;
      C lambda = it->second;
      for (const auto& [p, c] : row.v) {
        auto [jt, fresh] = r.v.try_emplace(p, CoeffTraits<C>::zero());
        jt->second -= lambda * c;
        if (jt->second == 0.0) r.v.erase(jt);
      }
      r.v.erase(row.pivot);
      for (const auto& [idx, c] : row.expansion) {
        auto [jt, fresh] = r.expansion.try_emplace(idx, CoeffTraits<C>::zero());
        jt->second -= lambda * c;
        if (CoeffTraits<C>::is_zero(jt->second)) r.expansion.erase(jt);
      }
    }
  }

  // Single-sector rows feed the sector-fullness pruning.
  std::uint64_t mask = row.v.begin()->first.x;
  bool single = true;
  for (const auto& [p, c] : row.v)
    if (p.x != mask) single = false;
  if (single) sector_ranks_[mask] += 1;

  pivots_.emplace(row.pivot, rows_.size());
  rows_.push_back(std::move(row));
  return true;
}

template class ClosureEchelon<Rational>;
template class ClosureEchelon<double>;

}  // namespace detail

template <class C>
MemberReport<C> LieBasisT<C>::member(const PauliSumT<C>& h) const {
  if (h.n() != n_) throw ValidationError("site count mismatch");
  auto red = echelon_.reduce(h);
  MemberReport<C> rep;
  rep.member = red.member;
  for (const auto& [p, c] : red.residual) {
    if constexpr (std::is_same_v<C, Rational>) {
      rep.residual += abs(c);
    } else {
      rep.residual += std::fabs(c);
    }
  }
  if (rep.member) {
    rep.coordinates.assign(elements_.size(), CoeffTraits<C>::zero());
    for (const auto& [idx, c] : red.coordinates) rep.coordinates[idx] = c;
  }
  return rep;
}

template <class C>
ExprPtr LieBasisT<C>::provenance_expression(std::size_t index) const {
  if (index >= provenance_.size()) throw ValidationError("element index out of range");
  return provenance_[index];
}

template class LieBasisT<Rational>;
template class LieBasisT<double>;

namespace {

// Number of independent symmetric Hermitian operators whose strings carry
// exactly the x-mask m: balanced raising/lowering content on the m sites
// times free I/Z letters elsewhere.
long sector_cap(std::uint64_t m, int n) {
  int w = std::popcount(m);
  if (w & 1) return 0;
  long binom = 1;
  for (int i = 0; i < w / 2; ++i) binom = binom * (w - i) / (i + 1);
  return binom << (n - w);
}

template <class C>
std::set<std::uint64_t> xmasks_of(const PauliSumT<C>& a) {
  std::set<std::uint64_t> out;
  for (const auto& [p, c] : a.terms()) out.insert(p.x);
  return out;
}

}  // namespace

template <class C>
LieBasisT<C> close(const std::vector<PauliSumT<C>>& generators, const SymmetrySpec& spec,
                   std::optional<long> max_dim) {
  if (generators.empty()) throw ValidationError("close needs at least one generator");
  int n = generators[0].n();
  if (spec.n() != n) throw ValidationError("spec does not match generators");
  for (const auto& g : generators) {
    if (g.n() != n) throw ValidationError("generators disagree on site count");
    if (!is_symmetric(g, spec)) throw ValidationError("non-symmetric generator");
  }
  long budget = max_dim.value_or(full_symmetric_dim(spec));

  LieBasisT<C> basis;
  basis.n_ = n;
  basis.spec_ = spec;
  basis.generators_ = generators;

  // Sector bookkeeping for the fullness pruning: a bracket whose possible
  // target x-sectors are all spanned already must reduce to zero (brackets
  // of symmetric operators are symmetric; sector components independently).
  std::map<std::uint64_t, long> caps;
  std::vector<std::set<std::uint64_t>> masks;
  auto sector_full = [&](std::uint64_t m) {
    auto it = caps.find(m);
    if (it == caps.end()) it = caps.emplace(m, sector_cap(m, n)).first;
    auto r = basis.echelon_.sector_ranks().find(m);
    long rank = r == basis.echelon_.sector_ranks().end() ? 0 : r->second;
    return rank >= it->second;
  };

  auto try_insert = [&](const PauliSumT<C>& cand, ExprPtr prov) {
    if (cand.zero()) return;
    if (basis.echelon_.insert(cand, basis.elements_.size())) {
      basis.elements_.push_back(cand);
      basis.provenance_.push_back(std::move(prov));
      masks.push_back(xmasks_of(cand));
      if (static_cast<long>(basis.elements_.size()) > budget)
        throw BudgetError("closure dimension exceeds budget " + std::to_string(budget));
    }
  };

  auto all_targets_full = [&](const std::set<std::uint64_t>& a,
                              const std::set<std::uint64_t>& b) {
    for (auto ma : a)
      for (auto mb : b)
        if (!sector_full(ma ^ mb)) return false;
    return true;
  };

  std::vector<std::set<std::uint64_t>> gen_masks;
  gen_masks.reserve(generators.size());
  for (const auto& g : generators) gen_masks.push_back(xmasks_of(g));

  for (std::size_t i = 0; i < generators.size(); ++i)
    try_insert(generators[i], expr_leaf(static_cast<int>(i)));

  // Fixed point: every element against every original generator, then all
  // element pairs; appended elements extend both sweeps until nothing new.
  std::size_t gen_mark = 0, pair_mark = 0;
  while (gen_mark < basis.elements_.size() || pair_mark < basis.elements_.size()) {
    while (gen_mark < basis.elements_.size()) {
      std::size_t i = gen_mark++;
      for (std::size_t g = 0; g < generators.size(); ++g) {
        if (all_targets_full(masks[i], gen_masks[g])) continue;
        try_insert(bracket(basis.elements_[i], generators[g]),
                   expr_bracket(basis.provenance_[i], expr_leaf(static_cast<int>(g))));
      }
    }
    while (pair_mark < basis.elements_.size()) {
      std::size_t j = pair_mark++;
      for (std::size_t i = 0; i < j; ++i) {
        if (all_targets_full(masks[i], masks[j])) continue;
        try_insert(bracket(basis.elements_[i], basis.elements_[j]),
                   expr_bracket(basis.provenance_[i], basis.provenance_[j]));
      }
    }
  }
  basis.closed_ = true;
  return basis;
}

template LieBasis close<Rational>(const std::vector<PauliSumQ>&, const SymmetrySpec&,
                                  std::optional<long>);
template LieBasisF close<double>(const std::vector<PauliSumF>&, const SymmetrySpec&,
                                 std::optional<long>);

std::vector<PauliSumQ> klocal_symmetric_basis(int n, int k, const SymmetrySpec& spec) {
  if (k < 1 || k > n) throw ValidationError("k out of range");
  if (spec.n() != n) throw ValidationError("spec does not match n");
  if (!spec.two_level()) throw ValidationError("k-local basis needs a two-level spec");

  std::vector<PauliSumQ> out;
  detail::ClosureEchelon<Rational> ech;

  // Identity first (w = 0).
  PauliSumQ id(n);
  id.add({0, 0}, Rational(1));
  ech.insert(id, 0);
  out.push_back(id);

  // Subsets of each weight in lexicographic order, letters {X,Y,Z} in
  // canonical order with site-0-major significance.
  for (int w = 1; w <= k; ++w) {
    std::vector<int> sites(w);
    for (int i = 0; i < w; ++i) sites[i] = i;
    while (true) {
      long count = 1;
      for (int i = 0; i < w; ++i) count *= 3;
      for (long code = 0; code < count; ++code) {
        PauliString p;
        long c = code;
        for (int i = w - 1; i >= 0; --i) {
          int letter = c % 3;  // 0=X, 1=Y, 2=Z
          c /= 3;
          int j = sites[i];
          if (letter == 0) {
            p.x |= 1ull << j;
          } else if (letter == 1) {
            p.x |= 1ull << j;
            p.z |= 1ull << j;
          } else {
            p.z |= 1ull << j;
          }
        }
        if (p.weight() != w) throw InternalError("weight mismatch in basis enumeration");
        PauliSumQ one(n);
        one.add(p, Rational(1));
        PauliSumQ tw = twirl(one, spec);
        if (tw.zero()) continue;
        if (ech.insert(tw, out.size())) out.push_back(tw);
      }
      // Next lexicographic w-subset of {0..n-1}.
      int i = w - 1;
      while (i >= 0 && sites[i] == n - w + i) --i;
      if (i < 0) break;
      ++sites[i];
      for (int j = i + 1; j < w; ++j) sites[j] = sites[j - 1] + 1;
    }
  }
  return out;
}

DimensionReport dimension_report(int n, int kmin, int kmax, const SymmetrySpec& spec) {
  if (kmin < 1 || kmax > n || kmin > kmax) throw ValidationError("bad k range");
  DimensionReport rep;
  rep.n = n;
  std::vector<long> dims;
  for (int k = kmin; k <= kmax; ++k) {
    auto basis = close(klocal_symmetric_basis(n, k, spec), spec);
    DimensionRow row;
    row.k = k;
    row.dim = static_cast<long>(basis.dimension());
    row.dim_traceless = row.dim - 1;
    row.s_k_dim = s_k_dimension(n, k, spec);
    row.irreps = irrep_count(spec, k);
    rep.rows.push_back(row);
    dims.push_back(row.dim);
  }
  long irr_n = irrep_count(spec, n);
  for (auto& row : rep.rows) {
    // Bound against the full-locality row; needs k range reaching n to be
    // informative, otherwise compares with the top computed row.
    const auto& top = rep.rows.back();
    long gap = top.dim - row.dim;
    long need = (top.k == n ? irr_n : irrep_count(spec, top.k)) - row.irreps;
    row.gap_ok = gap >= need;
  }
  for (std::size_t a = 0; a < rep.rows.size(); ++a)
    for (std::size_t b = a; b < rep.rows.size(); ++b) {
      long gap = rep.rows[b].dim - rep.rows[a].dim;
      long need = rep.rows[b].irreps - rep.rows[a].irreps;
      if (gap < need) rep.pairwise_ok = false;
    }
  return rep;
}

}  // namespace symlie
