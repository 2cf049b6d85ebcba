#include "symlie/qudit_energy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numbers>
#include <sstream>
#include <tuple>

#include "symlie/detail/echelon.hpp"
#include "symlie/errors.hpp"

namespace symlie {

namespace {

using Complex = std::complex<double>;

// Mixed-radix index helpers; site 0 is the most significant digit.
struct SiteIndexer {
  std::vector<int> dims;
  std::vector<long> strides;
  long total = 1;

  explicit SiteIndexer(std::vector<int> d) : dims(std::move(d)) {
    strides.assign(dims.size(), 1);
    for (int j = static_cast<int>(dims.size()) - 1; j >= 0; --j) {
      strides[j] = total;
      total *= dims[j];
    }
  }
  int digit(long idx, int j) const {
    return static_cast<int>((idx / strides[j]) % dims[j]);
  }
  long with_digit(long idx, int j, int v) const {
    return idx + static_cast<long>(v - digit(idx, j)) * strides[j];
  }
  long level_sum(long idx) const {
    long s = 0;
    for (std::size_t j = 0; j < dims.size(); ++j) s += digit(idx, j);
    return s;
  }
};

// Hermitian bracket i[A, B], matching the Pauli-sum convention.
Matrix mbracket(const Matrix& a, const Matrix& b) {
  return Complex(0, 1) * (a * b - b * a);
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Rational rat_from_double(double x) {
  Rational q(x);  // exact: doubles are dyadic rationals
  q.canonicalize();
  return q;
}

void validate_spec(const QuditSpec& spec) {
  if (spec.n < 1 || spec.d < 2) throw ValidationError("qudit spec needs n >= 1 and d >= 2");
  if (spec.ancillas < 0 || spec.ancillas > 2)
    throw ValidationError("qudit spec supports at most two ancilla qubits");
  if (!(spec.gap > 0)) throw ValidationError("qudit spec needs a positive gap");
}

void validate_gen(const QuditSpec& spec, const QuditGen& g) {
  auto sys_site = [&](int j) { return j >= 0 && j < spec.n; };
  auto anc_site = [&](int a) { return a >= spec.n && a < spec.sites(); };
  auto level = [&](int l) { return l >= 1 && l <= spec.d - 1; };
  switch (g.kind) {
    case QuditGenKind::hop_star:
      if (g.sites.size() != 2 || g.levels.size() != 1 || !sys_site(g.sites[0]) ||
          !anc_site(g.sites[1]) || !level(g.levels[0]))
        throw ValidationError("invalid star hop " + gen_name(g));
      return;
    case QuditGenKind::hop_pair:
      if (g.sites.size() != 2 || g.levels.size() != 2 || !sys_site(g.sites[0]) ||
          !sys_site(g.sites[1]) || g.sites[0] == g.sites[1] || !level(g.levels[0]) ||
          !level(g.levels[1]))
        throw ValidationError("invalid pair hop " + gen_name(g));
      return;
    case QuditGenKind::z_level:
      if (g.sites.size() != 1 || g.levels.size() != 1 || !sys_site(g.sites[0]) ||
          !level(g.levels[0]))
        throw ValidationError("invalid level difference " + gen_name(g));
      return;
    case QuditGenKind::z_ancilla:
      if (g.sites.size() != 1 || !g.levels.empty() || !anc_site(g.sites[0]))
        throw ValidationError("invalid ancilla Z " + gen_name(g));
      return;
  }
  throw ValidationError("unknown qudit generator kind");
}

QuditGen hop_pair_gen(int j, int jp, int l, int lp) {
  if (j > jp) {
    std::swap(j, jp);
    std::swap(l, lp);
  }
  return QuditGen{QuditGenKind::hop_pair, {j, jp}, {l, lp}};
}

using SparseM = Eigen::SparseMatrix<Complex>;

SparseM sparse_from_triplets(long dim, std::vector<Eigen::Triplet<Complex>>& trips) {
  SparseM m(dim, dim);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

SparseM sparse_from_dense(const Matrix& m, double drop = 0.0) {
  std::vector<Eigen::Triplet<Complex>> trips;
  for (long c = 0; c < m.cols(); ++c)
    for (long r = 0; r < m.rows(); ++r)
      if (std::abs(m(r, c)) > drop) trips.emplace_back(r, c, m(r, c));
  return sparse_from_triplets(m.rows(), trips);
}

// Shared leaf catalog for provenance trees: generator -> leaf index, with the
// dense matrix on the spec's full site list kept alongside.
struct QCatalog {
  const QuditSpec* spec = nullptr;
  std::vector<QuditGen> gens;
  std::vector<QuditOperator> ops;
  std::vector<Matrix> mats;
  std::map<QuditGen, int> index;

  explicit QCatalog(const QuditSpec& s) : spec(&s) {}
  int get(const QuditGen& g) {
    auto it = index.find(g);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(gens.size());
    gens.push_back(g);
    ops.push_back(build_interaction(*spec, g));
    mats.push_back(to_matrix(ops.back()));
    index.emplace(g, id);
    return id;
    }
};

// One node of an interaction cycle: a system site with its level pair
// {level-1, level}, or the ancilla (level 0).
struct CycleNode {
  int site = 0;
  int level = 0;  // 0 marks the ancilla node
};

struct QChain {
  ExprPtr tree;
  Matrix realized;
  int sign = 0;  // realized = sign * (projector-led drop-first - drop-last)
};

// Nested-bracket ladder over the cycle, mirroring the qubit chain: spine of
// consecutive hops, closed by the star hop back to the first node either
// directly or dressed with Z_a/2; exactly one closing survives. The realized
// operator is sign * (P_{q0} Z_{q1}..Z_{qv-2} Z_a - Z_{q0}..Z_{qv-2}), where
// P is the level-pair projector of the first node.
QChain build_chain(QCatalog& cat, const std::vector<CycleNode>& cycle) {
  const QuditSpec& spec = *cat.spec;
  const int v = static_cast<int>(cycle.size());
  if (v < 2) throw InternalError("interaction cycle needs at least two nodes");
  const int anc = spec.n;  // chains always close through the first ancilla
  if (cycle.back().level != 0 || cycle.back().site != anc)
    throw InternalError("interaction cycle must end at the ancilla");

  auto edge = [&](const CycleNode& p, const CycleNode& q) -> QuditGen {
    if (q.level == 0) return QuditGen{QuditGenKind::hop_star, {p.site, q.site}, {p.level}};
    if (p.level == 0) return QuditGen{QuditGenKind::hop_star, {q.site, p.site}, {q.level}};
    return hop_pair_gen(p.site, q.site, p.level, q.level);
  };

  int first_edge = cat.get(edge(cycle[0], cycle[1]));
  ExprPtr spine = expr_leaf(first_edge);
  Matrix espine = cat.mats[first_edge];
  for (int j = 2; j < v; ++j) {
    int e = cat.get(edge(cycle[j - 1], cycle[j]));
    spine = expr_bracket(spine, expr_leaf(e));
    espine = mbracket(espine, cat.mats[e]);
  }

  int closing = cat.get(edge(cycle.back(), cycle.front()));
  Matrix f_r = mbracket(espine, cat.mats[closing]);
  int za = cat.get(QuditGen{QuditGenKind::z_ancilla, {anc}, {}});
  Matrix tcl = mbracket(0.5 * cat.mats[za], cat.mats[closing]);
  Matrix f_t = mbracket(espine, tcl);

  const double tol = 1e-9;
  bool r_zero = max_abs(f_r) < tol;
  bool t_zero = max_abs(f_t) < tol;
  if (r_zero == t_zero) throw InternalError("cycle closing dichotomy failed");

  QChain out;
  if (!r_zero) {
    out.tree = expr_bracket(spine, expr_leaf(closing));
    out.realized = f_r;
  } else {
    out.tree = expr_bracket(
        spine, expr_bracket(expr_scale(Rational(1, 2), expr_leaf(za)), expr_leaf(closing)));
    out.realized = f_t;
  }

  SiteIndexer ix(spec.dims());
  Matrix target = Matrix::Zero(ix.total, ix.total);
  for (long s = 0; s < ix.total; ++s) {
    double first = 1, last = 1;
    for (int j = 0; j < v - 1; ++j) {
      int dg = ix.digit(s, cycle[j].site);
      int l = cycle[j].level;
      double z = dg == l - 1 ? 1.0 : (dg == l ? -1.0 : 0.0);
      if (j == 0)
        first *= (dg == l - 1 || dg == l) ? 1.0 : 0.0;
      else
        first *= z;
      last *= z;
    }
    first *= ix.digit(s, anc) == 0 ? 1.0 : -1.0;
    target(s, s) = first - last;
  }
  if (max_abs(out.realized - target) < tol)
    out.sign = 1;
  else if (max_abs(out.realized + target) < tol)
    out.sign = -1;
  else
    throw InternalError("cycle identity mismatch");
  return out;
}

// Caches chains and single-state diagonal trees during one synthesis run.
struct SynthContext {
  QCatalog cat;
  std::map<std::vector<std::pair<int, int>>, QChain> chains;
  std::map<long, ExprPtr> state_trees;

  explicit SynthContext(const QuditSpec& s) : cat(s) {}

  const QChain& chain(const std::vector<CycleNode>& cycle) {
    std::vector<std::pair<int, int>> key;
    key.reserve(cycle.size());
    for (const auto& nd : cycle) key.emplace_back(nd.site, nd.level);
    auto it = chains.find(key);
    if (it != chains.end()) return it->second;
    return chains.emplace(std::move(key), build_chain(cat, cycle)).first->second;
  }
};

int key_weight(const std::vector<int>& key) {
  int w = 0;
  for (int v : key) w += v != 0;
  return w;
}

// Expands a diagonal table (exact rationals over the system basis) into scaled
// chain trees plus one ancilla-Z term; the |0>_a sector action of the summed
// trees reproduces the table exactly. Level-l products telescope through the
// single-state projectors realized by ancilla-closed cycles.
std::vector<ExprPtr> build_diagonal(SynthContext& ctx, const std::vector<Rational>& table) {
  const QuditSpec& spec = *ctx.cat.spec;
  const int n = spec.n;
  const int d = spec.d;
  auto coeffs = qudit_diag_decompose<Rational>(table, n, d);
  std::map<std::vector<int>, Rational> work(coeffs.begin(), coeffs.end());
  std::vector<ExprPtr> kids;

  for (int w = n; w >= 1; --w) {
    std::vector<std::vector<int>> keys;
    for (const auto& [k, g] : work)
      if (key_weight(k) == w && sgn(g) != 0) keys.push_back(k);
    for (const auto& key : keys) {
      Rational g = work[key];
      work.erase(key);
      std::vector<int> sites;  // descending; the largest site leads the cycle
      for (int j = n - 1; j >= 0; --j)
        if (key[j] != 0) sites.push_back(j);
      int j1 = sites[0];
      int l1 = key[j1];
      auto add_chain = [&](int lambda, const Rational& cf) {
        std::vector<CycleNode> cycle;
        cycle.push_back({j1, lambda});
        for (std::size_t i = 1; i < sites.size(); ++i) cycle.push_back({sites[i], key[sites[i]]});
        cycle.push_back({spec.n, 0});
        const QChain& ch = ctx.chain(cycle);
        kids.push_back(expr_scale(cf / (2 * ch.sign), ch.tree));
      };
      if (l1 >= 2) {
        add_chain(l1 - 1, g);
        add_chain(l1, -g);
      } else {
        std::vector<int> rest = key;
        rest[j1] = 0;
        work[rest] += g;
        add_chain(1, -2 * g);
        for (int m = 2; m <= d - 1; ++m) add_chain(m, -g);
      }
    }
  }

  Rational c_ident = work.count(std::vector<int>(n, 0)) ? work[std::vector<int>(n, 0)] : Rational(0);
  if (sgn(c_ident) != 0) {
    int za = ctx.cat.get(QuditGen{QuditGenKind::z_ancilla, {spec.n}, {}});
    kids.push_back(expr_scale(c_ident, expr_leaf(za)));
  }
  return kids;
}

// Tree whose |0>_a sector action is exactly the single-state projector.
ExprPtr state_projector_tree(SynthContext& ctx, long state) {
  auto it = ctx.state_trees.find(state);
  if (it != ctx.state_trees.end()) return it->second;
  const QuditSpec& spec = *ctx.cat.spec;
  long dim = 1;
  for (int j = 0; j < spec.n; ++j) dim *= spec.d;
  std::vector<Rational> table(dim, Rational(0));
  table[state] = Rational(1);
  ExprPtr tree = expr_sum(build_diagonal(ctx, table));
  ctx.state_trees.emplace(state, tree);
  return tree;
}

// Greedy ladder between equal-energy basis states: each hop moves one quantum
// from the lowest surplus site to the lowest deficit site, shrinking the digit
// distance by two.
struct LadderHop {
  long from = 0, to = 0;
  QuditGen gen;
};

std::vector<LadderHop> ladder_path(const QuditSpec& spec, long from, long to) {
  SiteIndexer ix(std::vector<int>(spec.n, spec.d));
  std::vector<LadderHop> hops;
  long cur = from;
  while (cur != to) {
    int v = -1, w = -1;
    for (int j = 0; j < spec.n; ++j) {
      int cj = ix.digit(cur, j), tj = ix.digit(to, j);
      if (v < 0 && cj > tj) v = j;
      if (w < 0 && cj < tj) w = j;
    }
    if (v < 0 || w < 0) throw InternalError("ladder endpoints have unequal energy");
    int lv = ix.digit(cur, v);
    int lw = ix.digit(cur, w) + 1;
    long nxt = ix.with_digit(ix.with_digit(cur, v, lv - 1), w, lw);
    hops.push_back({cur, nxt, hop_pair_gen(v, w, lv, lw)});
    cur = nxt;
  }
  return hops;
}

// Adds the Hermitian contribution a|r><c| + conj(a)|c><r| as bracket ladders:
// projector-extracted single dyads fold along the hop path into the symmetric
// and antisymmetric transfer operators between the endpoints.
void add_pair(SynthContext& ctx, std::vector<ExprPtr>& kids, long r, long c, Complex a) {
  double alpha = a.real();
  double beta = a.imag();
  if (alpha == 0 && beta == 0) return;

  auto hops = ladder_path(*ctx.cat.spec, c, r);  // path c -> r
  if (hops.empty()) throw InternalError("pair ladder between equal states");

  // cur = tau(p_i, p_0); K(x,y) = i|x><y| - i|y><x|, G(x,y) = |x><y| + |y><x|.
  ExprPtr cur = expr_bracket(state_projector_tree(ctx, hops[0].to),
                             expr_leaf(ctx.cat.get(hops[0].gen)));
  bool is_k = true;
  int sign = 1;
  for (std::size_t i = 1; i < hops.size(); ++i) {
    ExprPtr hop_g = expr_bracket(
        state_projector_tree(ctx, hops[i].to),
        expr_bracket(state_projector_tree(ctx, hops[i].from), expr_leaf(ctx.cat.get(hops[i].gen))));
    cur = expr_bracket(hop_g, cur);
    if (is_k) {
      sign = -sign;  // bracket(G(c,b), K(b,a)) = -G(c,a)
      is_k = false;
    } else {
      is_k = true;  // bracket(G(c,b), G(b,a)) = K(c,a)
    }
  }

  ExprPtr g_tree, k_tree;
  if (is_k) {
    k_tree = sign == 1 ? cur : expr_scale(Rational(-1), cur);
    if (alpha != 0) g_tree = expr_bracket(state_projector_tree(ctx, c), k_tree);
  } else {
    g_tree = sign == 1 ? cur : expr_scale(Rational(-1), cur);
    if (beta != 0) k_tree = expr_bracket(state_projector_tree(ctx, r), g_tree);
  }
  if (alpha != 0) kids.push_back(expr_scale(rat_from_double(alpha), g_tree));
  if (beta != 0) kids.push_back(expr_scale(rat_from_double(beta), k_tree));
}

}  // namespace

std::vector<int> QuditSpec::dims() const {
  validate_spec(*this);
  std::vector<int> out(static_cast<std::size_t>(n), d);
  for (int a = 0; a < ancillas; ++a) out.push_back(2);
  return out;
}

long QuditSpec::dim() const {
  long total = 1;
  for (int dj : dims()) {
    if (total > (1L << 40) / dj) throw ValidationError("qudit space dimension overflows the budget");
    total *= dj;
  }
  return total;
}

bool QuditGen::operator<(const QuditGen& o) const {
  return std::tie(kind, sites, levels) < std::tie(o.kind, o.sites, o.levels);
}

std::string gen_name(const QuditGen& g) {
  std::ostringstream os;
  switch (g.kind) {
    case QuditGenKind::hop_star:
      os << "R{" << g.levels[0] << "}(" << g.sites[0] << "," << g.sites[1] << ")";
      break;
    case QuditGenKind::hop_pair:
      os << "R{" << g.levels[0] << "," << g.levels[1] << "}(" << g.sites[0] << "," << g.sites[1]
         << ")";
      break;
    case QuditGenKind::z_level:
      os << "Z{" << g.levels[0] << "}(" << g.sites[0] << ")";
      break;
    case QuditGenKind::z_ancilla:
      os << "Za(" << g.sites[0] << ")";
      break;
  }
  return os.str();
}

QuditOperator qudit_operator(
    std::vector<int> dims,
    const std::vector<std::tuple<long, long, std::complex<double>>>& entries) {
  long dim = 1;
  for (int dj : dims) {
    if (dj < 2) throw ValidationError("every site dimension must be at least 2");
    if (dim > (1L << 40) / dj) throw ValidationError("operator dimension overflows the budget");
    dim *= dj;
  }
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(entries.size());
  for (const auto& [r, c, x] : entries) {
    if (r < 0 || r >= dim || c < 0 || c >= dim)
      throw ValidationError("operator entry outside the index range");
    trips.emplace_back(r, c, x);
  }
  QuditOperator out;
  out.dims = std::move(dims);
  out.mat = sparse_from_triplets(dim, trips);
  SparseM adj = SparseM(out.mat.adjoint());
  double defect = 0;
  SparseM diff = out.mat - adj;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseM::InnerIterator it(diff, k); it; ++it)
      defect = std::max(defect, std::abs(it.value()));
  out.hermitian = defect == 0;
  return out;
}

Matrix to_matrix(const QuditOperator& op) {
  if (op.mat.rows() > kDenseBudget)
    throw BudgetError("operator exceeds the dense simulation budget");
  return Matrix(op.mat);
}

QuditOperator build_interaction(const QuditSpec& spec, const QuditGen& gen) {
  validate_spec(spec);
  validate_gen(spec, gen);
  SiteIndexer ix(spec.dims());
  std::vector<Eigen::Triplet<Complex>> trips;
  switch (gen.kind) {
    case QuditGenKind::hop_star: {
      int j = gen.sites[0], a = gen.sites[1], l = gen.levels[0];
      for (long s = 0; s < ix.total; ++s)
        if (ix.digit(s, j) == l && ix.digit(s, a) == 0) {
          long p = ix.with_digit(ix.with_digit(s, j, l - 1), a, 1);
          trips.emplace_back(p, s, 1.0);
          trips.emplace_back(s, p, 1.0);
        }
      break;
    }
    case QuditGenKind::hop_pair: {
      int j = gen.sites[0], jp = gen.sites[1], l = gen.levels[0], lp = gen.levels[1];
      for (long s = 0; s < ix.total; ++s)
        if (ix.digit(s, j) == l && ix.digit(s, jp) == lp - 1) {
          long p = ix.with_digit(ix.with_digit(s, j, l - 1), jp, lp);
          trips.emplace_back(p, s, 1.0);
          trips.emplace_back(s, p, 1.0);
        }
      break;
    }
    case QuditGenKind::z_level: {
      int j = gen.sites[0], l = gen.levels[0];
      for (long s = 0; s < ix.total; ++s) {
        int dg = ix.digit(s, j);
        if (dg == l - 1)
          trips.emplace_back(s, s, 1.0);
        else if (dg == l)
          trips.emplace_back(s, s, -1.0);
      }
      break;
    }
    case QuditGenKind::z_ancilla: {
      int a = gen.sites[0];
      for (long s = 0; s < ix.total; ++s)
        trips.emplace_back(s, s, ix.digit(s, a) == 0 ? 1.0 : -1.0);
      break;
    }
  }
  QuditOperator out;
  out.dims = spec.dims();
  out.mat = sparse_from_triplets(ix.total, trips);
  out.hermitian = true;
  return out;
}

QuditOperator intrinsic_hamiltonian(const QuditSpec& spec) {
  SiteIndexer ix(spec.dims());
  std::vector<Eigen::Triplet<Complex>> trips;
  for (long s = 0; s < ix.total; ++s)
    trips.emplace_back(s, s, spec.gap * static_cast<double>(ix.level_sum(s)));
  QuditOperator out;
  out.dims = spec.dims();
  out.mat = sparse_from_triplets(ix.total, trips);
  out.hermitian = true;
  return out;
}

bool check_energy_conserving(const QuditOperator& op, const QuditSpec& spec) {
  std::vector<int> full = spec.dims();
  std::vector<int> sys(full.begin(), full.begin() + spec.n);
  if (op.dims != full && op.dims != sys)
    throw ValidationError("operator dimensions do not match the spec");
  SiteIndexer ix(op.dims);
  for (int k = 0; k < op.mat.outerSize(); ++k)
    for (SparseM::InnerIterator it(op.mat, k); it; ++it)
      if (it.value() != Complex(0, 0) && ix.level_sum(it.row()) != ix.level_sum(it.col()))
        return false;
  return true;
}

TwoAncillaReduction two_ancilla_reduce(const QuditSpec& spec, int j, int jp, int l, int lp) {
  validate_spec(spec);
  if (spec.ancillas < 2)
    throw ValidationError("the two-ancilla reduction needs two ancilla qubits");
  if (j < 0 || j >= spec.n || jp < 0 || jp >= spec.n || j == jp)
    throw ValidationError("the two-ancilla reduction needs two distinct system sites");
  if (l < 1 || l > spec.d - 1 || lp < 1 || lp > spec.d - 1)
    throw ValidationError("hop levels must lie in 1..d-1");
  const int b = spec.n + 1;  // second ancilla hosts the nested bracket

  // Minimal three-site space {d, d, 2}: system pair plus the bridging ancilla.
  QuditSpec mini{2, spec.d, spec.gap, 1};
  QuditGen a_mini{QuditGenKind::hop_star, {0, 2}, {l}};
  QuditGen b_mini{QuditGenKind::hop_star, {1, 2}, {lp}};
  QuditGen z_mini{QuditGenKind::z_ancilla, {2}, {}};
  Matrix am = to_matrix(build_interaction(mini, a_mini));
  Matrix bm = to_matrix(build_interaction(mini, b_mini));
  Matrix zm = to_matrix(build_interaction(mini, z_mini));

  // (1/2)[B, [A, Z_b]] with [X, Y] = -i bracket(X, Y).
  Matrix lhs = -0.5 * mbracket(bm, mbracket(am, zm));
  Matrix rhs = to_matrix(build_interaction(mini, hop_pair_gen(0, 1, l, lp))) * zm;

  TwoAncillaReduction out;
  out.max_abs_diff = max_abs(lhs - rhs);
  out.identity_ok = out.max_abs_diff == 0.0;
  if (!out.identity_ok) throw InternalError("two-ancilla reduction identity failed");
  out.lhs = QuditOperator{mini.dims(), sparse_from_dense(lhs), true};
  out.rhs = QuditOperator{mini.dims(), sparse_from_dense(rhs), true};
  out.primitives = {QuditGen{QuditGenKind::hop_star, {j, b}, {l}},
                    QuditGen{QuditGenKind::hop_star, {jp, b}, {lp}},
                    QuditGen{QuditGenKind::z_ancilla, {b}, {}}};
  out.provenance = expr_scale(
      Rational(-1, 2), expr_bracket(expr_leaf(1), expr_bracket(expr_leaf(0), expr_leaf(2))));
  Matrix check = evaluate_expr_dense(*out.provenance, {am, bm, zm});
  if (max_abs(check - lhs) != 0.0)
    throw InternalError("two-ancilla provenance does not evaluate to the bracket");
  return out;
}

template <class C>
std::map<std::vector<int>, C> qudit_diag_decompose(const std::vector<C>& table, int n, int d) {
  if (n < 1 || d < 2) throw ValidationError("diagonal decomposition needs n >= 1 and d >= 2");
  long dim = 1;
  for (int j = 0; j < n; ++j) {
    if (dim > (1L << 30) / d) throw ValidationError("diagonal table too large");
    dim *= d;
  }
  if (static_cast<long>(table.size()) != dim)
    throw ValidationError("diagonal table size does not match d^n");

  std::vector<C> data = table;
  SiteIndexer ix(std::vector<int>(n, d));
  // Per axis: values t_0..t_{d-1} become the mean a (code 0) and the partial
  // sums b_l (code l) with t_s = a + b_{s+1} - b_s, b_0 = b_d = 0.
  for (int j = 0; j < n; ++j) {
    for (long base = 0; base < dim; ++base) {
      if (ix.digit(base, j) != 0) continue;
      C a = CoeffTraits<C>::zero();
      for (int s = 0; s < d; ++s) a += data[base + s * ix.strides[j]];
      a = a / d;
      C b = CoeffTraits<C>::zero();
      std::vector<C> bs(static_cast<std::size_t>(d), CoeffTraits<C>::zero());
      for (int s = 0; s + 1 < d; ++s) {
        b += data[base + s * ix.strides[j]] - a;
        bs[static_cast<std::size_t>(s) + 1] = b;
      }
      data[base] = a;
      for (int l = 1; l < d; ++l) data[base + l * ix.strides[j]] = bs[static_cast<std::size_t>(l)];
    }
  }

  std::map<std::vector<int>, C> out;
  for (long idx = 0; idx < dim; ++idx) {
    if (CoeffTraits<C>::is_zero(data[idx])) continue;
    std::vector<int> key(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) key[static_cast<std::size_t>(j)] = ix.digit(idx, j);
    out.emplace(std::move(key), data[idx]);
  }
  return out;
}

template <class C>
std::vector<C> qudit_diag_reconstruct(const std::map<std::vector<int>, C>& coeffs, int n, int d) {
  if (n < 1 || d < 2) throw ValidationError("diagonal reconstruction needs n >= 1 and d >= 2");
  long dim = 1;
  for (int j = 0; j < n; ++j) dim *= d;
  SiteIndexer ix(std::vector<int>(n, d));
  std::vector<C> out(static_cast<std::size_t>(dim), CoeffTraits<C>::zero());
  for (const auto& [key, g] : coeffs) {
    if (static_cast<int>(key.size()) != n)
      throw ValidationError("diagonal key length does not match n");
    for (long s = 0; s < dim; ++s) {
      long val = 1;
      for (int j = 0; j < n && val != 0; ++j) {
        int code = key[static_cast<std::size_t>(j)];
        if (code == 0) continue;
        if (code < 1 || code > d - 1) throw ValidationError("diagonal key code outside 0..d-1");
        int dg = ix.digit(s, j);
        val *= dg == code - 1 ? 1 : (dg == code ? -1 : 0);
      }
      if (val != 0) out[static_cast<std::size_t>(s)] += val > 0 ? g : -g;
    }
  }
  return out;
}

template std::map<std::vector<int>, Rational> qudit_diag_decompose<Rational>(
    const std::vector<Rational>&, int, int);
template std::map<std::vector<int>, double> qudit_diag_decompose<double>(const std::vector<double>&,
                                                                         int, int);
template std::vector<Rational> qudit_diag_reconstruct<Rational>(
    const std::map<std::vector<int>, Rational>&, int, int);
template std::vector<double> qudit_diag_reconstruct<double>(
    const std::map<std::vector<int>, double>&, int, int);

Matrix evaluate_expr_dense(const Expr& e, const std::vector<Matrix>& leaves) {
  std::map<const Expr*, Matrix> memo;
  std::function<const Matrix&(const Expr&)> eval = [&](const Expr& node) -> const Matrix& {
    auto it = memo.find(&node);
    if (it != memo.end()) return it->second;
    Matrix val;
    switch (node.kind) {
      case Expr::Kind::leaf:
        val = leaves.at(static_cast<std::size_t>(node.leaf));
        break;
      case Expr::Kind::scale:
        val = node.factor.get_d() * eval(*node.kids[0]);
        break;
      case Expr::Kind::sum: {
        val = Matrix::Zero(eval(*node.kids[0]).rows(), eval(*node.kids[0]).cols());
        for (const auto& k : node.kids) val += eval(*k);
        break;
      }
      case Expr::Kind::bracket:
        val = mbracket(eval(*node.kids[0]), eval(*node.kids[1]));
        break;
    }
    return memo.emplace(&node, std::move(val)).first->second;
  };
  return eval(e);
}

QuditPlan qudit_synthesize(const QuditOperator& h, const QuditSpec& spec, double t) {
  validate_spec(spec);
  if (spec.ancillas != 1)
    throw ValidationError("synthesis runs on a spec with exactly one ancilla qubit");
  long full_dim = spec.dim();
  if (full_dim > kDenseBudget)
    throw BudgetError("qudit synthesis exceeds the dense simulation budget");
  std::vector<int> sys_dims(static_cast<std::size_t>(spec.n), spec.d);
  if (h.dims != sys_dims)
    throw ValidationError("the target hamiltonian must act on the system qudits only");
  if (!h.hermitian) throw ValidationError("the target hamiltonian must be Hermitian");
  QuditSpec sys{spec.n, spec.d, spec.gap, 0};
  if (!check_energy_conserving(h, sys))
    throw ValidationError("the target hamiltonian does not conserve energy");

  QuditPlan plan;
  plan.spec = spec;
  plan.level = PlanLevel::hamiltonian;
  plan.scheme = "exact";

  Matrix hd = Matrix(h.mat);
  if (max_abs(hd) == 0.0) return plan;

  // Fast path: the target is itself one of the primitive couplings.
  std::vector<QuditGen> probes;
  for (int j = 0; j < spec.n; ++j)
    for (int l = 1; l <= spec.d - 1; ++l) probes.push_back(QuditGen{QuditGenKind::z_level, {j}, {l}});
  for (int j = 0; j < spec.n; ++j)
    for (int jp = j + 1; jp < spec.n; ++jp)
      for (int l = 1; l <= spec.d - 1; ++l)
        for (int lp = 1; lp <= spec.d - 1; ++lp) probes.push_back(hop_pair_gen(j, jp, l, lp));
  for (const QuditGen& g : probes) {
    Matrix gm = Matrix(build_interaction(sys, g).mat);
    if (max_abs(hd - gm) == 0.0) {
      plan.primitives = {g};
      plan.steps.push_back(QuditStep{build_interaction(spec, g), g, expr_leaf(0), t});
      return plan;
    }
  }

  SynthContext ctx(spec);
  std::vector<ExprPtr> kids;

  long sys_dim = hd.rows();
  std::vector<Rational> table(static_cast<std::size_t>(sys_dim));
  for (long s = 0; s < sys_dim; ++s) table[static_cast<std::size_t>(s)] = rat_from_double(hd(s, s).real());
  bool any_diag = false;
  for (const auto& q : table)
    if (sgn(q) != 0) any_diag = true;
  if (any_diag) {
    auto dk = build_diagonal(ctx, table);
    kids.insert(kids.end(), dk.begin(), dk.end());
  }

  for (long r = 0; r < sys_dim; ++r)
    for (long c = r + 1; c < sys_dim; ++c)
      if (hd(r, c) != Complex(0, 0)) add_pair(ctx, kids, r, c, hd(r, c));

  if (kids.empty()) return plan;
  ExprPtr mega = kids.size() == 1 ? kids[0] : expr_sum(kids);
  Matrix ham = evaluate_expr_dense(*mega, ctx.cat.mats);

  // The constructed operator must be ancilla-block-diagonal with the target
  // in the |0>_a block.
  double scale = std::max(1.0, max_abs(ham));
  Matrix blk00 = Matrix::Zero(sys_dim, sys_dim);
  double off = 0;
  for (long r = 0; r < full_dim; ++r)
    for (long c = 0; c < full_dim; ++c) {
      bool r0 = r % 2 == 0, c0 = c % 2 == 0;
      if (r0 && c0)
        blk00(r / 2, c / 2) = ham(r, c);
      else if (r0 != c0)
        off = std::max(off, std::abs(ham(r, c)));
    }
  if (off > 1e-12 * scale || max_abs(blk00 - hd) > 1e-9 * scale)
    throw InternalError("synthesized interaction does not restrict to the target");

  QuditStep step;
  step.ham = QuditOperator{spec.dims(), sparse_from_dense(ham, 1e-13 * scale), true};
  step.provenance = mega;
  step.duration = t;
  plan.primitives = ctx.cat.gens;
  plan.steps.push_back(std::move(step));
  return plan;
}

Matrix run_qudit_plan(const QuditPlan& plan) {
  long dim = plan.spec.dim();
  if (dim > kDenseBudget) throw BudgetError("qudit plan exceeds the dense simulation budget");
  Matrix u = Matrix::Identity(dim, dim);
  std::map<std::tuple<int, std::vector<int>, std::vector<int>, double>, Matrix> memo;
  for (const QuditStep& step : plan.steps) {
    if (step.ham.mat.rows() != dim)
      throw ValidationError("plan step dimension does not match the spec");
    if (step.gen) {
      auto key = std::make_tuple(static_cast<int>(step.gen->kind), step.gen->sites,
                                 step.gen->levels, step.duration);
      auto it = memo.find(key);
      if (it == memo.end())
        it = memo.emplace(key, expm_unitary(Matrix(step.ham.mat), step.duration)).first;
      u = it->second * u;
    } else {
      u = expm_unitary(Matrix(step.ham.mat), step.duration) * u;
    }
  }
  return std::exp(Complex(0, plan.phase)) * u;
}

QuditVerifyReport verify_qudit_plan(const QuditPlan& plan, const QuditOperator& target, double t,
                                    std::optional<double> tol) {
  std::vector<int> sys_dims(static_cast<std::size_t>(plan.spec.n), plan.spec.d);
  if (target.dims != sys_dims)
    throw ValidationError("the verification target must act on the system qudits only");
  Matrix u = run_qudit_plan(plan);
  AncillaBlock blk = ancilla_block(u, plan.spec.dims(), plan.spec.ancillas);
  Matrix want = expm_unitary(Matrix(target.mat), t);
  QuditVerifyReport rep;
  rep.sector_distance = distance(blk.block, want);
  rep.leakage = blk.leakage;
  double fallback = plan.level == PlanLevel::pulse && plan.epsilon > 0 ? plan.epsilon : 1e-10;
  rep.tolerance = tol.value_or(fallback);
  if (rep.tolerance <= 0) rep.tolerance = 1e-10;
  rep.pass = rep.sector_distance <= rep.tolerance && rep.leakage <= rep.tolerance;
  return rep;
}

namespace {

constexpr long kQuditPulseBudget = 400000;

// Pulse expansion over dense generators: cascade rotations where the bracket
// relations close in su(2), Strang splitting for non-commuting sums, nested
// group commutators elsewhere. Mirrors the qubit expander with matrix-level
// eligibility checks.
struct QExpander {
  const QuditPlan& plan_;
  Scheme scheme_;
  std::vector<Matrix> leafmats_;
  std::vector<QuditStep> pulses_;
  std::vector<StepSchedule> schedules_;
  double model_ = 0;
  std::size_t step_ = 0;

  std::map<const Expr*, Matrix> evalm_;
  std::map<const Expr*, bool> exact_;
  std::map<const Expr*, bool> commuting_;
  std::map<const Expr*, std::pair<int, double>> cascade_;  // mode, nu
  std::map<const Expr*, double> norm_;
  std::map<const Expr*, long> count_;

  QExpander(const QuditPlan& plan, Scheme scheme) : plan_(plan), scheme_(scheme) {
    for (const QuditGen& g : plan.primitives)
      leafmats_.push_back(to_matrix(build_interaction(plan.spec, g)));
  }

  const Matrix& eval(const Expr& e) {
    auto it = evalm_.find(&e);
    if (it != evalm_.end()) return it->second;
    Matrix val;
    switch (e.kind) {
      case Expr::Kind::leaf:
        val = leafmats_.at(static_cast<std::size_t>(e.leaf));
        break;
      case Expr::Kind::scale:
        val = e.factor.get_d() * eval(*e.kids[0]);
        break;
      case Expr::Kind::sum: {
        val = Matrix::Zero(eval(*e.kids[0]).rows(), eval(*e.kids[0]).cols());
        for (const auto& k : e.kids) val += eval(*k);
        break;
      }
      case Expr::Kind::bracket:
        val = mbracket(eval(*e.kids[0]), eval(*e.kids[1]));
        break;
    }
    return evalm_.emplace(&e, std::move(val)).first->second;
  }

  double snorm(const Expr& e) {
    auto it = norm_.find(&e);
    if (it != norm_.end()) return it->second;
    const Matrix& m = eval(e);
    double v = 0;
    if (max_abs(m) > 0) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
      v = es.eigenvalues().cwiseAbs().maxCoeff();
    }
    norm_.emplace(&e, v);
    return v;
  }

  static double rel_scale(const Matrix& a, const Matrix& b) {
    return std::max(1.0, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
  }

  bool commuting(const Expr& e) {
    auto it = commuting_.find(&e);
    if (it != commuting_.end()) return it->second;
    bool ok = true;
    for (std::size_t i = 0; i < e.kids.size() && ok; ++i)
      for (std::size_t j = i + 1; j < e.kids.size() && ok; ++j) {
        const Matrix& a = eval(*e.kids[i]);
        const Matrix& b = eval(*e.kids[j]);
        ok = max_abs(a * b - b * a) <= 1e-12 * rel_scale(a, b);
      }
    commuting_.emplace(&e, ok);
    return ok;
  }

  // mode 1: bracket(a, c) = -nu b; mode 2: bracket(b, c) = +nu a; mode 3:
  // c = 0; mode 0: no su(2) relation.
  std::pair<int, double> cascade(const Expr& e) {
    auto it = cascade_.find(&e);
    if (it != cascade_.end()) return it->second;
    const Matrix& a = eval(*e.kids[0]);
    const Matrix& b = eval(*e.kids[1]);
    Matrix c = mbracket(a, b);
    std::pair<int, double> out{0, 0.0};
    double cscale = std::max(1.0, max_abs(c));
    if (max_abs(c) <= 1e-12 * rel_scale(a, b)) {
      out = {3, 0.0};
    } else {
      auto proportional = [&](const Matrix& lhs, const Matrix& rhs, double sign_wanted,
                              double& nu) {
        // lhs ?= sign_wanted * nu * rhs with nu > 0
        double rm = max_abs(rhs);
        if (rm == 0) return false;
        long br = 0, bc = 0;
        double best = 0;
        for (long rr = 0; rr < rhs.rows(); ++rr)
          for (long cc = 0; cc < rhs.cols(); ++cc)
            if (std::abs(rhs(rr, cc)) > best) {
              best = std::abs(rhs(rr, cc));
              br = rr;
              bc = cc;
            }
        Complex ratio = lhs(br, bc) / rhs(br, bc);
        if (std::abs(ratio.imag()) > 1e-12 * std::max(1.0, std::abs(ratio))) return false;
        double k = ratio.real();
        if (sign_wanted * k <= 0) return false;
        double tol = 1e-12 * std::max(1.0, std::max(max_abs(lhs), std::abs(k) * rm));
        if (max_abs(lhs - k * rhs) > tol) return false;
        nu = sign_wanted * k;
        return nu > 0;
      };
      double nu = 0;
      Matrix bac = mbracket(a, c);
      if (proportional(bac, b, -1.0, nu)) {
        out = {1, nu};
      } else {
        Matrix bbc = mbracket(b, c);
        if (proportional(bbc, a, +1.0, nu)) out = {2, nu};
      }
    }
    (void)cscale;
    cascade_.emplace(&e, out);
    return out;
  }

  bool exact(const Expr& e) {
    auto it = exact_.find(&e);
    if (it != exact_.end()) return it->second;
    bool ok = false;
    switch (e.kind) {
      case Expr::Kind::leaf:
        ok = true;
        break;
      case Expr::Kind::scale:
        ok = exact(*e.kids[0]);
        break;
      case Expr::Kind::sum: {
        ok = true;
        for (const auto& k : e.kids) ok = ok && exact(*k);
        ok = ok && commuting(e);
        break;
      }
      case Expr::Kind::bracket: {
        auto [mode, nu] = cascade(e);
        (void)nu;
        if (mode == 3)
          ok = true;
        else
          ok = scheme_ == Scheme::trotter2 && mode != 0 && exact(*e.kids[0]) && exact(*e.kids[1]);
        break;
      }
    }
    exact_.emplace(&e, ok);
    return ok;
  }

  long exact_pulse_count(const Expr& e) {
    auto it = count_.find(&e);
    if (it != count_.end()) return it->second;
    long c = 0;
    switch (e.kind) {
      case Expr::Kind::leaf:
        c = 1;
        break;
      case Expr::Kind::scale:
        c = sgn(e.factor) == 0 ? 0 : exact_pulse_count(*e.kids[0]);
        break;
      case Expr::Kind::sum:
        for (const auto& k : e.kids) c += exact_pulse_count(*k);
        break;
      case Expr::Kind::bracket: {
        auto [mode, nu] = cascade(e);
        (void)nu;
        if (mode == 3)
          c = 0;
        else if (mode == 0)
          throw InternalError("pulse count requested for an inexact bracket");
        else {
          const Expr& a = mode == 1 ? *e.kids[0] : *e.kids[1];
          const Expr& b = mode == 1 ? *e.kids[1] : *e.kids[0];
          c = 2 * exact_pulse_count(a) + exact_pulse_count(b);
        }
        break;
      }
    }
    count_.emplace(&e, c);
    return c;
  }

  void emit(int leaf, double theta) {
    if (theta == 0) return;
    if (static_cast<long>(pulses_.size()) >= kQuditPulseBudget)
      throw BudgetError("pulse budget exceeded");
    QuditStep st;
    st.ham = build_interaction(plan_.spec, plan_.primitives[static_cast<std::size_t>(leaf)]);
    st.gen = plan_.primitives[static_cast<std::size_t>(leaf)];
    st.duration = theta;
    pulses_.push_back(std::move(st));
  }

  void rot(const Expr& e, double theta, double eps, const std::string& path) {
    if (theta == 0) return;
    switch (e.kind) {
      case Expr::Kind::leaf:
        emit(e.leaf, theta);
        return;
      case Expr::Kind::scale:
        rot(*e.kids[0], theta * e.factor.get_d(), eps, path);
        return;
      case Expr::Kind::sum:
        rot_sum(e, theta, eps, path);
        return;
      case Expr::Kind::bracket:
        rot_bracket(e, theta, eps, path);
        return;
    }
  }

  void rot_sum(const Expr& e, double theta, double eps, const std::string& path) {
    const std::size_t m = e.kids.size();
    if (m == 1) {
      rot(*e.kids[0], theta, eps, path);
      return;
    }
    if (commuting(e)) {
      for (std::size_t i = 0; i < m; ++i)
        rot(*e.kids[i], theta, eps / static_cast<double>(m), path + "/c" + std::to_string(i));
      return;
    }
    bool kids_exact = true;
    double norm_sum = 0;
    for (const auto& k : e.kids) {
      kids_exact = kids_exact && exact(*k);
      norm_sum += snorm(*k);
    }
    double c = norm_sum * norm_sum * norm_sum / 6.0;
    double eps_own = kids_exact ? eps : eps / 2;
    if (eps_own <= 0) throw BudgetError("no error budget left for nested splitting");
    double mag = std::fabs(theta);
    long r = std::max(1L, static_cast<long>(std::ceil(std::sqrt(c * mag * mag * mag / eps_own))));
    model_ += c * mag * mag * mag / (static_cast<double>(r) * static_cast<double>(r));
    schedules_.push_back({step_, path, "strang", r,
                          theta / (2.0 * static_cast<double>(r)),
                          c * mag * mag * mag / (static_cast<double>(r) * static_cast<double>(r))});
    double child_eps =
        kids_exact ? 0.0
                   : (eps / 2) / (static_cast<double>(2 * m - 1) * static_cast<double>(r));
    for (long rep = 0; rep < r; ++rep) {
      for (std::size_t i = 0; i + 1 < m; ++i)
        rot(*e.kids[i], theta / (2.0 * r), child_eps, path + "/s" + std::to_string(i));
      rot(*e.kids[m - 1], theta / static_cast<double>(r), child_eps,
          path + "/s" + std::to_string(m - 1));
      for (std::size_t i = m - 1; i-- > 0;)
        rot(*e.kids[i], theta / (2.0 * r), child_eps, path + "/s" + std::to_string(i));
    }
  }

  void rot_bracket(const Expr& e, double theta, double eps, const std::string& path) {
    auto [mode, nu] = cascade(e);
    if (mode == 3) return;  // zero generator
    if (scheme_ == Scheme::trotter2 && mode != 0) {
      const Expr& a = mode == 1 ? *e.kids[0] : *e.kids[1];
      const Expr& b = mode == 1 ? *e.kids[1] : *e.kids[0];
      double th = mode == 1 ? theta : -theta;
      double sq = std::sqrt(nu);
      double phi = -std::numbers::pi / (2.0 * sq);
      int inexact = (exact(a) ? 0 : 2) + (exact(b) ? 0 : 1);
      double share = inexact > 0 ? eps / inexact : 0.0;
      rot(a, -phi, exact(a) ? 0.0 : share, path + "/conj");
      rot(b, th * sq, exact(b) ? 0.0 : share, path + "/axis");
      rot(a, phi, exact(a) ? 0.0 : share, path + "/conj");
      return;
    }
    group_commutator(e, theta, eps, path);
  }

  void group_commutator(const Expr& e, double theta, double eps, const std::string& path) {
    const Expr* a = e.kids[0].get();
    const Expr* b = e.kids[1].get();
    double mag = std::fabs(theta);
    if (theta < 0) std::swap(a, b);
    double cn = snorm(*a) * snorm(*b);
    if (cn == 0) return;
    bool ops_exact = exact(*a) && exact(*b);
    double eps_own = ops_exact ? eps : eps / 2;
    if (eps_own <= 0) throw BudgetError("no error budget left for nested group commutator");
    double delta = std::min(eps_own / (cn * mag), std::sqrt(mag));
    long reps = static_cast<long>(std::ceil(mag / (delta * delta)));
    delta = std::sqrt(mag / static_cast<double>(reps));
    model_ += cn * mag * delta;
    if (ops_exact) {
      long per_rep = 2 * (exact_pulse_count(*a) + exact_pulse_count(*b));
      if (static_cast<long>(pulses_.size()) + reps * per_rep > kQuditPulseBudget) {
        std::ostringstream os;
        os << "pulse budget exceeded: the commutator approximation needs " << reps * per_rep
           << " pulses; a target error of about " << cn * mag * std::sqrt(mag) * per_rep /
                                                         static_cast<double>(kQuditPulseBudget)
           << " or looser is achievable";
        throw BudgetError(os.str());
      }
    }
    schedules_.push_back({step_, path, "groupcomm", reps, delta, cn * mag * delta});
    double share = ops_exact ? 0.0 : (eps / 2) / (4.0 * static_cast<double>(reps));
    for (long rep = 0; rep < reps; ++rep) {
      rot(*a, delta, share, path + "/ga");
      rot(*b, delta, share, path + "/gb");
      rot(*a, -delta, share, path + "/ga");
      rot(*b, -delta, share, path + "/gb");
    }
  }

  void expand_step(std::size_t index, const QuditStep& step, double eps) {
    step_ = index;
    if (step.gen) {
      auto it = std::find(plan_.primitives.begin(), plan_.primitives.end(), *step.gen);
      if (it == plan_.primitives.end())
        throw ValidationError("plan step uses a generator outside the primitive list");
      emit(static_cast<int>(it - plan_.primitives.begin()), step.duration);
      return;
    }
    if (!step.provenance)
      throw ValidationError("hamiltonian-level step lacks provenance for expansion");
    rot(*step.provenance, step.duration, eps, "step" + std::to_string(index));
  }
};

}  // namespace

QuditExpandReport qudit_expand_to_pulses(const QuditPlan& plan, double epsilon, Scheme scheme) {
  if (!(epsilon > 0)) throw ValidationError("pulse expansion needs a positive epsilon");
  if (plan.level != PlanLevel::hamiltonian)
    throw ValidationError("pulse expansion starts from a hamiltonian-level plan");
  if (plan.steps.empty()) {
    QuditExpandReport rep;
    rep.plan = plan;
    rep.plan.level = PlanLevel::pulse;
    rep.plan.epsilon = epsilon;
    rep.plan.scheme = to_string(scheme);
    return rep;
  }

  Matrix u_target = run_qudit_plan(plan);
  AncillaBlock target = ancilla_block(u_target, plan.spec.dims(), plan.spec.ancillas);

  std::optional<QuditExpandReport> best;
  for (int attempt = 0; attempt < 6; ++attempt) {
    double eps_model = epsilon / std::pow(2.0, attempt);
    double per_step = eps_model / static_cast<double>(plan.steps.size());
    QExpander ex(plan, scheme);
    for (std::size_t i = 0; i < plan.steps.size(); ++i) ex.expand_step(i, plan.steps[i], per_step);

    QuditExpandReport rep;
    rep.plan.spec = plan.spec;
    rep.plan.level = PlanLevel::pulse;
    rep.plan.epsilon = epsilon;
    rep.plan.scheme = to_string(scheme);
    rep.plan.primitive_set = plan.primitive_set;
    rep.plan.primitives = plan.primitives;
    rep.plan.steps = std::move(ex.pulses_);
    rep.plan.phase = plan.phase;
    rep.model_error = ex.model_;
    rep.pulse_count = static_cast<long>(rep.plan.steps.size());
    rep.attempts = attempt + 1;
    rep.schedules = std::move(ex.schedules_);

    Matrix u = run_qudit_plan(rep.plan);
    AncillaBlock got = ancilla_block(u, plan.spec.dims(), plan.spec.ancillas);
    rep.measured_error = distance(got.block, target.block);
    rep.leakage = got.leakage;
    if (rep.measured_error <= epsilon && rep.leakage <= epsilon) return rep;
    if (!best || rep.measured_error < best->measured_error) best = std::move(rep);
  }
  std::ostringstream os;
  os << "pulse expansion missed epsilon " << epsilon << ": best measured error "
     << best->measured_error << " with " << best->pulse_count << " pulses";
  throw BudgetError(os.str());
}

EnergyAlgebraReport energy_algebra_dim(const QuditSpec& spec) {
  validate_spec(spec);
  long sys_dim = 1;
  for (int j = 0; j < spec.n; ++j) {
    sys_dim *= spec.d;
    if (sys_dim > 512) throw BudgetError("energy algebra report limited to d^n <= 512");
  }

  EnergyAlgebraReport rep;
  rep.multiplicities.assign(static_cast<std::size_t>(spec.n * (spec.d - 1) + 1), 0);
  SiteIndexer ix(std::vector<int>(spec.n, spec.d));
  for (long s = 0; s < sys_dim; ++s) rep.multiplicities[static_cast<std::size_t>(ix.level_sum(s))]++;
  for (long m : rep.multiplicities) rep.dim += m * m;

  // Skew-Hermitian generators: i|r><r| for every basis state plus i R for the
  // nearest-neighbor level hops. Real-linear closure under [A, B] = AB - BA.
  auto generators_dense = [&]() {
    std::vector<Matrix> gens;
    for (long r = 0; r < sys_dim; ++r) {
      Matrix g = Matrix::Zero(sys_dim, sys_dim);
      g(r, r) = Complex(0, 1);
      gens.push_back(std::move(g));
    }
    QuditSpec sys{spec.n, spec.d, spec.gap, 0};
    for (int j = 0; j + 1 < spec.n; ++j)
      for (int l = 1; l <= spec.d - 1; ++l)
        for (int lp = 1; lp <= spec.d - 1; ++lp) {
          Matrix g = Complex(0, 1) * Matrix(build_interaction(sys, hop_pair_gen(j, j + 1, l, lp)).mat);
          gens.push_back(std::move(g));
        }
    return gens;
  };

  if (sys_dim <= 16) {
    rep.closure_checked = true;
    detail::FloatEchelon<long> ech;
    std::vector<Matrix> basis;
    std::deque<std::pair<std::size_t, std::size_t>> todo;
    auto vectorize = [&](const Matrix& m) {
      std::map<long, double> row;
      for (long r = 0; r < sys_dim; ++r)
        for (long c = 0; c < sys_dim; ++c) {
          Complex x = m(r, c);
          if (x.real() != 0) row[2 * (r * sys_dim + c)] = x.real();
          if (x.imag() != 0) row[2 * (r * sys_dim + c) + 1] = x.imag();
        }
      return row;
    };
    auto push = [&](Matrix m) {
      if (!ech.insert(vectorize(m))) return;
      std::size_t k = basis.size();
      basis.push_back(std::move(m));
      for (std::size_t i = 0; i < k; ++i) todo.emplace_back(i, k);
    };
    for (Matrix& g : generators_dense()) push(std::move(g));
    bool runaway = false;
    while (!todo.empty()) {
      auto [i, j] = todo.front();
      todo.pop_front();
      Matrix c = basis[i] * basis[j] - basis[j] * basis[i];
      push(std::move(c));
      if (static_cast<long>(basis.size()) > rep.dim + 8) {
        runaway = true;
        break;
      }
    }
    rep.closure_dim = static_cast<long>(ech.rank());
    rep.closure_ok = !runaway && rep.closure_dim == rep.dim;
  }

  if (sys_dim <= 12) {
    // Exact cross-check over rationals: the same closure with entries kept as
    // exact real/imaginary pairs.
    struct RMat {
      std::vector<Rational> re, im;
    };
    long nn = sys_dim * sys_dim;
    auto zero_m = [&]() {
      return RMat{std::vector<Rational>(static_cast<std::size_t>(nn), Rational(0)),
                  std::vector<Rational>(static_cast<std::size_t>(nn), Rational(0))};
    };
    auto rbracket = [&](const RMat& a, const RMat& b) {
      RMat c = zero_m();
      for (long r = 0; r < sys_dim; ++r)
        for (long k = 0; k < sys_dim; ++k) {
          std::size_t rk = static_cast<std::size_t>(r * sys_dim + k);
          if (sgn(a.re[rk]) == 0 && sgn(a.im[rk]) == 0 && sgn(b.re[rk]) == 0 && sgn(b.im[rk]) == 0)
            continue;
          for (long cc = 0; cc < sys_dim; ++cc) {
            std::size_t kc = static_cast<std::size_t>(k * sys_dim + cc);
            std::size_t rc = static_cast<std::size_t>(r * sys_dim + cc);
            // a*b term
            c.re[rc] += a.re[rk] * b.re[kc] - a.im[rk] * b.im[kc];
            c.im[rc] += a.re[rk] * b.im[kc] + a.im[rk] * b.re[kc];
            // -b*a term
            c.re[rc] -= b.re[rk] * a.re[kc] - b.im[rk] * a.im[kc];
            c.im[rc] -= b.re[rk] * a.im[kc] + b.im[rk] * a.re[kc];
          }
        }
      return c;
    };
    auto vectorize = [&](const RMat& m) {
      std::map<long, Rational> row;
      for (long idx = 0; idx < nn; ++idx) {
        if (sgn(m.re[static_cast<std::size_t>(idx)]) != 0)
          row[2 * idx] = m.re[static_cast<std::size_t>(idx)];
        if (sgn(m.im[static_cast<std::size_t>(idx)]) != 0)
          row[2 * idx + 1] = m.im[static_cast<std::size_t>(idx)];
      }
      return row;
    };
    detail::ExactEchelon<long> ech;
    std::vector<RMat> basis;
    std::deque<std::pair<std::size_t, std::size_t>> todo;
    auto push = [&](RMat m) {
      if (!ech.insert(vectorize(m))) return;
      std::size_t k = basis.size();
      basis.push_back(std::move(m));
      for (std::size_t i = 0; i < k; ++i) todo.emplace_back(i, k);
    };
    for (const Matrix& g : generators_dense()) {
      RMat m = zero_m();
      for (long r = 0; r < sys_dim; ++r)
        for (long c = 0; c < sys_dim; ++c) {
          Complex x = g(r, c);
          m.re[static_cast<std::size_t>(r * sys_dim + c)] = rat_from_double(x.real());
          m.im[static_cast<std::size_t>(r * sys_dim + c)] = rat_from_double(x.imag());
        }
      push(std::move(m));
    }
    bool runaway = false;
    while (!todo.empty()) {
      auto [i, j] = todo.front();
      todo.pop_front();
      push(rbracket(basis[i], basis[j]));
      if (static_cast<long>(basis.size()) > rep.dim + 8) {
        runaway = true;
        break;
      }
    }
    rep.exact_checked = !runaway;
    rep.exact_dim = static_cast<long>(ech.rank());
  }
  return rep;
}

}  // namespace symlie
