#pragma once
// Incremental row-echelon structures over sparse rows keyed by an ordered
// key type. Exact rows pivot on the first key in key order; float rows pivot
// on the largest magnitude with a relative threshold and keep the reduced
// (no pivot key appears in any other row) invariant.

#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "symlie/rational.hpp"

namespace symlie::detail {

template <class Key, class Less = std::less<Key>>
class ExactEchelon {
 public:
  using Row = std::map<Key, Rational, Less>;

  // Reduces v in place against stored rows. Returns true (and stores the
  // normalized row) when a nonzero remainder makes it independent.
  bool insert(Row v) {
    reduce(v);
    if (v.empty()) return false;
    Rational lead = v.begin()->second;
    for (auto& [k, c] : v) c /= lead;
    pivots_.emplace(v.begin()->first, rows_.size());
    rows_.push_back(std::move(v));
    return true;
  }

  // Remainder of v after reduction; empty iff v lies in the span.
  Row residual(Row v) const {
    reduce(v);
    return v;
  }

  bool in_span(Row v) const {
    reduce(v);
    return v.empty();
  }

  std::size_t rank() const { return rows_.size(); }
  const std::vector<Row>& rows() const { return rows_; }

  // Coefficients lambda with v = sum lambda_i row_i (normalized rows), when
  // v is in the span; false otherwise.
  bool coordinates(Row v, std::vector<std::pair<std::size_t, Rational>>& coords) const {
    coords.clear();
    while (!v.empty()) {
      auto it = pivots_.find(v.begin()->first);
      if (it == pivots_.end()) {
        coords.clear();
        return false;
      }
      Rational lambda = v.begin()->second;
      coords.emplace_back(it->second, lambda);
      axpy(v, -lambda, rows_[it->second]);
    }
    return true;
  }

 private:
  static void axpy(Row& v, const Rational& s, const Row& row) {
    for (const auto& [k, c] : row) {
      auto [it, fresh] = v.try_emplace(k, 0);
      it->second += s * c;
      if (sgn(it->second) == 0) v.erase(it);
    }
  }

  // Invariant: every stored row's first key is its pivot and pivots are
  // distinct, so eliminating the leading key repeatedly reduces any span
  // member to zero.
  void reduce(Row& v) const {
    while (!v.empty()) {
      auto it = pivots_.find(v.begin()->first);
      if (it == pivots_.end()) return;
      axpy(v, -v.begin()->second, rows_[it->second]);
    }
  }

  std::vector<Row> rows_;
  std::map<Key, std::size_t, Less> pivots_;
};

template <class Key, class Less = std::less<Key>>
class FloatEchelon {
 public:
  using Row = std::map<Key, double, Less>;
  static constexpr double kRelTol = 1e-10;

  bool insert(Row v) {
    double scale = norm(v);
    reduce(v);
    if (norm(v) <= kRelTol * std::max(scale, 1.0)) return false;
    Key pk{};
    double pc = 0;
    for (const auto& [k, c] : v) {
      if (std::fabs(c) > std::fabs(pc)) {
        pk = k;
        pc = c;
      }
    }
    for (auto& [k, c] : v) c /= pc;
    // Back-substitute so no stored row keeps the new pivot key.
    for (auto& row : rows_) {
      auto it = row.find(pk);
      if (it == row.end()) continue;
      double lambda = it->second;
      axpy(row, -lambda, v);
      row.erase(pk);
    }
    pivots_.emplace(pk, rows_.size());
    rows_.push_back(std::move(v));
    return true;
  }

  bool in_span(Row v) const {
    double scale = norm(v);
    reduce(v);
    return norm(v) <= kRelTol * std::max(scale, 1.0);
  }

  std::size_t rank() const { return rows_.size(); }

 private:
  static double norm(const Row& v) {
    double m = 0;
    for (const auto& [k, c] : v) m = std::max(m, std::fabs(c));
    return m;
  }
  static void axpy(Row& v, double s, const Row& row) {
    for (const auto& [k, c] : row) {
      double nv = (v.count(k) ? v[k] : 0.0) + s * c;
      if (nv == 0.0) {
        v.erase(k);
      } else {
        v[k] = nv;
      }
    }
  }
  // Reduced invariant makes a single pass over pivots complete.
  void reduce(Row& v) const {
    for (const auto& [pk, idx] : pivots_) {
      auto it = v.find(pk);
      if (it == v.end()) continue;
      double lambda = it->second;
      axpy(v, -lambda, rows_[idx]);
      v.erase(pk);
    }
  }

  std::vector<Row> rows_;
  std::map<Key, std::size_t, Less> pivots_;
};

}  // namespace symlie::detail
