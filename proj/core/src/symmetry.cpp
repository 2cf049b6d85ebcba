#include "symlie/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "symlie/detail/echelon.hpp"
#include "symlie/errors.hpp"
#include "symlie/lie_closure.hpp"

namespace symlie {

namespace {

constexpr std::size_t kChargeStateCap = 1u << 20;

void check_spec_size(const SymmetrySpec& spec, int n) {
  if (spec.n() != n) throw ValidationError("symmetry spec does not match site count");
}

}  // namespace

std::map<Rational, long> sector_multiplicities(const SymmetrySpec& spec) {
  std::map<Rational, long> acc{{Rational(0), 1}};
  for (const auto& charges : spec.sites) {
    std::map<Rational, long> next;
    for (const auto& [q, m] : acc)
      for (const auto& c : charges) next[q + c] += m;
    if (next.size() > kChargeStateCap) throw BudgetError("charge sector state count exceeds cap");
    acc = std::move(next);
  }
  return acc;
}

long irrep_count(const SymmetrySpec& spec, int l) {
  if (l < 0 || l > spec.n()) throw ValidationError("irrep_count: l out of range");
  std::set<Rational> sums{Rational(0)};
  for (int j = 0; j < l; ++j) {
    std::set<Rational> next;
    for (const auto& q : sums)
      for (const auto& c : spec.sites[j]) next.insert(q + c);
    if (next.size() > kChargeStateCap) throw BudgetError("charge sum count exceeds cap");
    sums = std::move(next);
  }
  return static_cast<long>(sums.size());
}

long dim_gap_bound(int n, int k, const SymmetrySpec& spec) {
  if (k > n) throw ValidationError("dim_gap_bound: k > n");
  return irrep_count(spec, n) - irrep_count(spec, k);
}

long full_symmetric_dim(const SymmetrySpec& spec) {
  long dim = 0;
  for (const auto& [q, m] : sector_multiplicities(spec)) dim += m * m;
  return dim;
}

namespace {

// Signed sector counts sum_{z in sector q} (-1)^{b.z} for one diagonal
// monomial b, via a per-site transfer DP.
std::map<Rational, long> signed_sector_counts(std::uint64_t b, const SymmetrySpec& spec) {
  std::map<Rational, long> acc{{Rational(0), 1}};
  for (int j = 0; j < spec.n(); ++j) {
    std::map<Rational, long> next;
    bool flip = (b >> j) & 1;
    for (const auto& [q, m] : acc) {
      next[q + spec.sites[j][0]] += m;
      long s = flip ? -m : m;
      auto [it, fresh] = next.try_emplace(q + spec.sites[j][1], 0);
      it->second += s;
    }
    if (next.size() > kChargeStateCap) throw BudgetError("charge sector state count exceeds cap");
    acc = std::move(next);
  }
  return acc;
}

template <class C>
ChargeVector charge_vector_impl(const PauliSumT<C>& a, const SymmetrySpec& spec) {
  check_spec_size(spec, a.n());
  if (!spec.two_level()) throw ValidationError("charge_vector needs a two-level spec");
  ChargeVector cv;
  for (const auto& [q, m] : sector_multiplicities(spec)) cv.sectors[q] = 0;
  for (const auto& [p, c] : a.terms()) {
    if (!p.diagonal()) continue;
    Rational cq;
    if constexpr (std::is_same_v<C, Rational>) {
      cq = c;
    } else {
      cq = Rational(c);  // exact binary expansion of the double
    }
    for (const auto& [q, m] : signed_sector_counts(p.z, spec)) cv.sectors[q] += cq * m;
  }
  return cv;
}

}  // namespace

ChargeVector charge_vector(const PauliSumQ& a, const SymmetrySpec& spec) {
  return charge_vector_impl(a, spec);
}
ChargeVector charge_vector(const PauliSumF& a, const SymmetrySpec& spec) {
  return charge_vector_impl(a, spec);
}

std::complex<double> character_function(const ChargeVector& cv, double theta) {
  std::complex<double> s = 0;
  for (const auto& [q, v] : cv.sectors)
    s += to_double(v) * std::exp(std::complex<double>(0, to_double(q) * theta));
  return s;
}

std::complex<double> character_function(const PauliSumQ& a, const SymmetrySpec& spec,
                                        double theta) {
  return character_function(charge_vector(a, spec), theta);
}

namespace {

constexpr int kTwirlWeightCap = 16;

}  // namespace

template <class C>
PauliSumT<C> twirl(const PauliSumT<C>& a, const SymmetrySpec& spec) {
  check_spec_size(spec, a.n());
  if (!spec.two_level()) throw ValidationError("twirl needs a two-level spec");
  PauliSumT<C> out(a.n());
  for (const auto& [p, c] : a.terms()) {
    if (p.x == 0) {
      out.add(p, c);  // diagonal terms commute with the charge and survive
      continue;
    }
    std::vector<int> xs;
    for (int j = 0; j < a.n(); ++j)
      if ((p.x >> j) & 1) xs.push_back(j);
    int w = static_cast<int>(xs.size());
    if (w > kTwirlWeightCap) throw BudgetError("twirl expansion weight exceeds cap");
    std::vector<Rational> delta(w);  // charge transferred by sigma+ at each x-site
    for (int i = 0; i < w; ++i)
      delta[i] = spec.sites[xs[i]][0] - spec.sites[xs[i]][1];
    std::uint64_t ymask_in = p.x & p.z;
    std::uint64_t smask = p.x;
    // Assignment s: bit i set = sigma+ at xs[i]. X expands with weight 1 on
    // both; Y carries -i on sigma+ and +i on sigma-.
    for (std::uint64_t s = 0; s < (1ull << w); ++s) {
      Rational transfer(0);
      for (int i = 0; i < w; ++i) transfer += ((s >> i) & 1) ? delta[i] : -delta[i];
      if (sgn(transfer) != 0) continue;
      // gamma = c * i^exp with exp from the Y letters.
      int expo = 0;
      for (int i = 0; i < w; ++i) {
        if ((ymask_in >> xs[i]) & 1) expo += ((s >> i) & 1) ? 3 : 1;  // -i or +i
      }
      // Recombine sigma^{s_i} = (X + s_i i Y)/2 over the x-sites: subsets m
      // pick Y letters, contributing i^{|m|} prod_{i in m} s_i. Odd total
      // powers of i cancel exactly against the complementary assignment
      // (e(s~) = -e(s) mod 4), so only the real even powers are kept.
      for (std::uint64_t m = 0; m < (1ull << w); ++m) {
        int e = expo + std::popcount(m);
        for (int i = 0; i < w; ++i)
          if (((m >> i) & 1) && !((s >> i) & 1)) e += 2;  // sign -1 for sigma-
        e &= 3;
        if (e == 1 || e == 3) continue;
        C mag = c;
        for (int i = 0; i < w; ++i) mag /= CoeffTraits<C>::from_long(2);
        if (e == 2) mag = -mag;
        std::uint64_t zm = p.z & ~smask;
        for (int i = 0; i < w; ++i)
          if ((m >> i) & 1) zm |= 1ull << xs[i];
        out.add({p.x, zm}, mag);
      }
    }
  }
  return out;
}

template PauliSumQ twirl<Rational>(const PauliSumQ&, const SymmetrySpec&);
template PauliSumF twirl<double>(const PauliSumF&, const SymmetrySpec&);

SkReport s_k_test(const PauliSumQ& h_diag, int k) {
  if (!h_diag.diagonal()) throw ValidationError("s_k_test needs a diagonal input");
  SkReport rep;
  std::map<int, Rational> sums;
  for (const auto& [p, c] : h_diag.terms()) {
    int y = p.weight();
    if (y > k) sums[y] += c;
  }
  for (const auto& [y, s] : sums)
    if (sgn(s) != 0) rep.violations[y] = s;
  rep.pass = rep.violations.empty();
  return rep;
}

namespace {

detail::ExactEchelon<Rational>::Row cv_row(const ChargeVector& cv) {
  detail::ExactEchelon<Rational>::Row row;
  for (const auto& [q, v] : cv.sectors)
    if (sgn(v) != 0) row[q] = v;
  return row;
}

}  // namespace

bool charge_span_test(const PauliSumQ& h, const std::vector<PauliSumQ>& generators,
                      const SymmetrySpec& spec) {
  detail::ExactEchelon<Rational> ech;
  for (const auto& g : generators) ech.insert(cv_row(charge_vector(g, spec)));
  return ech.in_span(cv_row(charge_vector(h, spec)));
}

long s_k_dimension(int n, int k, const SymmetrySpec& spec) {
  detail::ExactEchelon<Rational> ech;
  for (const auto& g : klocal_symmetric_basis(n, k, spec))
    ech.insert(cv_row(charge_vector(g, spec)));
  return static_cast<long>(ech.rank());
}

namespace {

// Zeros of sum_r e^{i c_r theta} for an equal-spaced charge list: with
// spacing s and m levels the sum is a geometric series vanishing iff
// e^{i m s theta} = 1 and e^{i s theta} != 1.
bool equal_spaced(const std::vector<Rational>& charges, Rational& spacing) {
  if (charges.size() < 2) return false;
  std::vector<Rational> c = charges;
  std::sort(c.begin(), c.end());
  spacing = c[1] - c[0];
  if (sgn(spacing) == 0) return false;
  for (std::size_t i = 2; i < c.size(); ++i)
    if (c[i] - c[i - 1] != spacing) return false;
  return true;
}

}  // namespace

TraceZeroReport trace_zero_scan(const SymmetrySpec& spec, int k, int n) {
  if (spec.n() == 0) throw ValidationError("empty spec");
  TraceZeroReport rep;
  const auto& charges = spec.sites[0];
  Rational s;
  const double two_pi = 2 * std::numbers::pi;
  if (charges.size() == 1) {
    // |e^{ic theta}| = 1: no zeros.
    rep.exact = true;
  } else if (equal_spaced(charges, s)) {
    long m = static_cast<long>(charges.size());
    double sd = std::fabs(to_double(s));
    rep.exact = true;
    for (long j = 1;; ++j) {
      if (j % m == 0) continue;  // e^{is theta} = 1 there: not a zero
      double theta = two_pi * j / (m * sd);
      if (theta >= two_pi - 1e-15) break;
      rep.zeros.push_back(theta);
    }
  } else {
    auto f = [&](double th) {
      std::complex<double> v = 0;
      for (const auto& c : charges) v += std::exp(std::complex<double>(0, to_double(c) * th));
      return v;
    };
    const int grid = 1 << 14;
    for (int i = 0; i < grid; ++i) {
      double th = two_pi * i / grid;
      // Local minimum candidates of |f|^2, refined by damped Newton on its
      // derivative.
      double a = std::abs(f(th)), b = std::abs(f(th + two_pi / grid));
      if (a > 0.5 || b < a) continue;
      double x = th;
      for (int it = 0; it < 60; ++it) {
        double h = 1e-7;
        double g0 = std::norm(f(x));
        double gp = (std::norm(f(x + h)) - std::norm(f(x - h))) / (2 * h);
        double gpp = (std::norm(f(x + h)) - 2 * g0 + std::norm(f(x - h))) / (h * h);
        if (std::fabs(gpp) < 1e-18) break;
        x -= gp / gpp;
      }
      if (x >= 0 && x < two_pi && std::abs(f(x)) <= 1e-10) {
        bool dup = false;
        for (double z : rep.zeros)
          if (std::fabs(z - x) < 1e-8) dup = true;
        if (!dup) rep.zeros.push_back(x);
      }
    }
    std::sort(rep.zeros.begin(), rep.zeros.end());
  }
  rep.flag = !rep.zeros.empty() && k < n;
  return rep;
}

namespace {

template <class C>
PauliSumT<C> table_to_pauli_impl(std::vector<C> h, int n) {
  if (n < 0 || n > 24) throw BudgetError("diagonal table size out of budget");
  std::size_t size = 1ull << n;
  if (h.size() != size) throw ValidationError("table must list all 2^n values");
  // In-place Walsh-Hadamard transform.
  for (int j = 0; j < n; ++j) {
    std::uint64_t bit = 1ull << j;
    for (std::uint64_t z = 0; z < size; ++z) {
      if (z & bit) continue;
      C a = h[z], b = h[z | bit];
      h[z] = a + b;
      h[z | bit] = a - b;
    }
  }
  PauliSumT<C> out(n);
  C scale = CoeffTraits<C>::one();
  for (int j = 0; j < n; ++j) scale /= CoeffTraits<C>::from_long(2);
  for (std::uint64_t b = 0; b < size; ++b) {
    C c = h[b] * scale;
    if (CoeffTraits<C>::is_zero(c)) continue;
    // Table indices put site 0 in the most significant bit (matching the
    // dense basis order); z masks put site 0 in bit 0, so reverse the bits.
    std::uint64_t mask = 0;
    for (int j = 0; j < n; ++j)
      if (b >> j & 1) mask |= 1ull << (n - 1 - j);
    out.add({0, mask}, c);
  }
  return out;
}

}  // namespace

PauliSumQ diagonal_table_to_pauli(const std::vector<Rational>& h, int n) {
  return table_to_pauli_impl(h, n);
}
PauliSumF diagonal_table_to_pauli(const std::vector<double>& h, int n) {
  return table_to_pauli_impl(h, n);
}

}  // namespace symlie
