#pragma once
// Bit-packed Pauli strings and sparse Hermitian Pauli sums with exact
// rational or floating coefficients.
//
// Conventions:
//   site letter = i^{x z} X^x Z^z, so (x,z) = (0,0) I, (1,0) X, (1,1) Y,
//   (0,1) Z and every letter is Hermitian.
//   bracket(A, B) = i[A, B], which maps Hermitian pairs to Hermitian sums.
//   Canonical term order compares site 0 first with I < X < Y < Z.

#include <algorithm>
#include <bit>
#include <cassert>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "symlie/rational.hpp"

namespace symlie {

inline constexpr int kMaxSites = 64;

struct PauliString {
  std::uint64_t x = 0;
  std::uint64_t z = 0;

  bool operator==(const PauliString&) const = default;

  std::uint64_t support() const { return x | z; }
  int weight() const { return std::popcount(x | z); }
  int xweight() const { return std::popcount(x); }
  bool diagonal() const { return x == 0; }

  // Letter code at site j: I=0, X=1, Y=2, Z=3 (canonical order).
  int letter(int j) const {
    bool xb = (x >> j) & 1, zb = (z >> j) & 1;
    return xb ? (zb ? 2 : 1) : (zb ? 3 : 0);
  }
};

// Canonical order: site 0 most significant, I < X < Y < Z.
struct CanonicalLess {
  bool operator()(const PauliString& a, const PauliString& b) const {
    std::uint64_t diff = (a.x ^ b.x) | (a.z ^ b.z);
    if (!diff) return false;
    int j = std::countr_zero(diff);
    return a.letter(j) < b.letter(j);
  }
};

// P * Q = i^k R with k in {0,1,2,3}.
struct PauliProduct {
  int k;
  PauliString r;
};

inline PauliProduct mul_pauli(const PauliString& p, const PauliString& q) {
  PauliString r{p.x ^ q.x, p.z ^ q.z};
  int k = std::popcount(p.x & p.z) + std::popcount(q.x & q.z) -
          std::popcount(r.x & r.z) + 2 * std::popcount(p.z & q.x);
  return {((k % 4) + 4) % 4, r};
}

inline bool commutes(const PauliString& p, const PauliString& q) {
  return ((std::popcount(p.x & q.z) + std::popcount(p.z & q.x)) & 1) == 0;
}

std::string to_string(const PauliString& p, int n);
PauliString pauli_from_string(const std::string& s);

// Sparse Hermitian operator: sum of real coefficients times Pauli strings.
template <class C>
class PauliSumT {
 public:
  using Coeff = C;
  using Terms = std::map<PauliString, C, CanonicalLess>;

  PauliSumT() = default;
  explicit PauliSumT(int n) : n_(n) {
    if (n < 0 || n > kMaxSites) throw std::invalid_argument("site count out of range");
  }

  int n() const { return n_; }
  const Terms& terms() const { return terms_; }
  bool zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  void add(const PauliString& p, const C& c) {
    auto [it, fresh] = terms_.try_emplace(p, c);
    if (!fresh) {
      it->second += c;
      if (CoeffTraits<C>::is_zero(it->second)) terms_.erase(it);
    } else if (CoeffTraits<C>::is_zero(it->second)) {
      terms_.erase(it);
    }
  }

  C coeff(const PauliString& p) const {
    auto it = terms_.find(p);
    return it == terms_.end() ? CoeffTraits<C>::zero() : it->second;
  }

  PauliSumT& operator+=(const PauliSumT& o) {
    check_same_n(o);
    for (const auto& [p, c] : o.terms_) add(p, c);
    return *this;
  }
  PauliSumT& operator-=(const PauliSumT& o) {
    check_same_n(o);
    for (const auto& [p, c] : o.terms_) add(p, -c);
    return *this;
  }
  PauliSumT& operator*=(const C& s) {
    if (CoeffTraits<C>::is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& [p, c] : terms_) c *= s;
    return *this;
  }

  friend PauliSumT operator+(PauliSumT a, const PauliSumT& b) { return a += b; }
  friend PauliSumT operator-(PauliSumT a, const PauliSumT& b) { return a -= b; }
  friend PauliSumT operator*(const C& s, PauliSumT a) { return a *= s; }

  bool operator==(const PauliSumT& o) const { return n_ == o.n_ && terms_ == o.terms_; }

  std::uint64_t support() const {
    std::uint64_t m = 0;
    for (const auto& [p, c] : terms_) m |= p.support();
    return m;
  }
  int max_weight() const {
    int w = 0;
    for (const auto& [p, c] : terms_) w = std::max(w, p.weight());
    return w;
  }
  bool diagonal() const {
    for (const auto& [p, c] : terms_)
      if (!p.diagonal()) return false;
    return true;
  }
  std::vector<int> support_sites() const {
    std::vector<int> out;
    std::uint64_t m = support();
    while (m) {
      out.push_back(std::countr_zero(m));
      m &= m - 1;
    }
    return out;
  }
  // Projection onto I/Z words; idempotent.
  PauliSumT diagonal_part() const {
    PauliSumT out(n_);
    for (const auto& [p, c] : terms_)
      if (p.diagonal()) out.add(p, c);
    return out;
  }
  // Sum of coefficient magnitudes (operator-norm upper bound).
  double norm1() const {
    double s = 0;
    for (const auto& [p, c] : terms_) s += CoeffTraits<C>::abs_double(c);
    return s;
  }

 private:
  void check_same_n(const PauliSumT& o) const {
    if (n_ != o.n_) throw std::invalid_argument("site count mismatch");
  }
  int n_ = 0;
  Terms terms_;
};

using PauliSumQ = PauliSumT<Rational>;
using PauliSumF = PauliSumT<double>;

// bracket(A, B) = i[A, B]. Anticommuting string pairs P, Q contribute
// 2 c_P c_Q i^{k+1} R where P Q = i^k R; k is odd there, so the result stays
// real and Hermitian.
template <class C>
PauliSumT<C> bracket(const PauliSumT<C>& a, const PauliSumT<C>& b) {
  if (a.n() != b.n()) throw std::invalid_argument("site count mismatch");
  PauliSumT<C> out(a.n());
  for (const auto& [p, cp] : a.terms()) {
    for (const auto& [q, cq] : b.terms()) {
      if (commutes(p, q)) continue;
      auto [k, r] = mul_pauli(p, q);
      assert(k % 2 == 1);
      C c = cp * cq;
      c += c;  // times 2
      out.add(r, k == 1 ? C(-c) : c);
    }
  }
  return out;
}

// Normalized Hilbert-Schmidt pairing: sum over strings of c_P(A) c_P(B).
template <class C>
C hs_inner(const PauliSumT<C>& a, const PauliSumT<C>& b) {
  C s = CoeffTraits<C>::zero();
  const auto& big = a.size() <= b.size() ? b : a;
  const auto& small = a.size() <= b.size() ? a : b;
  for (const auto& [p, c] : small.terms()) {
    auto it = big.terms().find(p);
    if (it != big.terms().end()) s += c * it->second;
  }
  return s;
}

template <class C>
std::string to_string(const PauliSumT<C>& a);

// Named symmetric generators.
enum class GenKind { R, T, Zlocal, Zmono };

struct GenRef {
  GenKind kind;
  std::vector<int> sites;  // R/T: {r, s}; Zlocal: {j}; Zmono: monomial sites
  bool operator==(const GenRef&) const = default;
};

// R_{rs} = (X_r X_s + Y_r Y_s)/2, T_{rs} = (X_r Y_s - Y_r X_s)/2,
// Zlocal j = Z_j, Zmono S = prod_{j in S} Z_j.
template <class C>
PauliSumT<C> make_generator(const GenRef& g, int n);

extern template PauliSumT<Rational> make_generator<Rational>(const GenRef&, int);
extern template PauliSumT<double> make_generator<double>(const GenRef&, int);

std::string gen_name(const GenRef& g);

// Abelian symmetry: each site carries a diagonal charge list (level r of
// site j has charge sites[j][r]). Qubits carry {+1, -1}; the equal-gap
// energy case carries {0, 1, ..., d-1}.
struct SymmetrySpec {
  std::vector<std::vector<Rational>> sites;

  static SymmetrySpec qubits(int n) {
    SymmetrySpec s;
    s.sites.assign(n, {Rational(1), Rational(-1)});
    return s;
  }
  static SymmetrySpec qudit_energy(int n, int d) {
    SymmetrySpec s;
    std::vector<Rational> ladder;
    for (int r = 0; r < d; ++r) ladder.emplace_back(r);
    s.sites.assign(n, ladder);
    return s;
  }
  int n() const { return static_cast<int>(sites.size()); }
  bool two_level() const {
    for (const auto& cs : sites)
      if (cs.size() != 2) return false;
    return true;
  }
  bool uniform_qubits() const {
    for (const auto& cs : sites)
      if (cs.size() != 2 || cs[0] != Rational(1) || cs[1] != Rational(-1)) return false;
    return true;
  }
};

// Traceless part of the charge operator: sum_j (c0_j - c1_j)/2 Z_j.
// Requires a two-level spec (Pauli strings live on qubits).
PauliSumQ charge_operator(const SymmetrySpec& spec);

// True iff bracket(A, charge_operator(spec)) = 0; the identity part of the
// charge operator never contributes.
template <class C>
bool is_symmetric(const PauliSumT<C>& a, const SymmetrySpec& spec);

extern template bool is_symmetric<Rational>(const PauliSumQ&, const SymmetrySpec&);
extern template bool is_symmetric<double>(const PauliSumF&, const SymmetrySpec&);

PauliSumF to_float(const PauliSumQ& a);

}  // namespace symlie
