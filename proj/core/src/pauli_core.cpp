#include "symlie/pauli_core.hpp"

#include <sstream>

#include "symlie/errors.hpp"

namespace symlie {

bool fits_int64(const Rational& q, std::int64_t& num, std::int64_t& den) {
  if (!q.get_num().fits_slong_p() || !q.get_den().fits_slong_p()) return false;
  num = q.get_num().get_si();
  den = q.get_den().get_si();
  return true;
}

std::string rational_to_string(const Rational& q) { return q.get_str(); }

Rational rational_from_string(const std::string& s) {
  Rational q;
  try {
    q = Rational(s);
  } catch (const std::invalid_argument&) {
    throw ValidationError("invalid rational literal: " + s);
  }
  if (q.get_den() == 0) throw ValidationError("zero denominator in rational literal: " + s);
  q.canonicalize();
  return q;
}

std::string to_string(const PauliString& p, int n) {
  static constexpr char kLetters[] = "IXYZ";
  std::string s(n, 'I');
  for (int j = 0; j < n; ++j) s[j] = kLetters[p.letter(j)];
  return s;
}

PauliString pauli_from_string(const std::string& s) {
  if (s.size() > kMaxSites) throw ValidationError("pauli string too long");
  PauliString p;
  for (std::size_t j = 0; j < s.size(); ++j) {
    switch (s[j]) {
      case 'I': break;
      case 'X': p.x |= 1ull << j; break;
      case 'Y': p.x |= 1ull << j; p.z |= 1ull << j; break;
      case 'Z': p.z |= 1ull << j; break;
      default: throw ValidationError("invalid pauli letter");
    }
  }
  return p;
}

template <class C>
std::string to_string(const PauliSumT<C>& a) {
  if (a.zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [p, c] : a.terms()) {
    if (!first) os << " + ";
    first = false;
    if constexpr (std::is_same_v<C, Rational>) {
      os << c.get_str();
    } else {
      os << c;
    }
    os << "*" << to_string(p, a.n());
  }
  return os.str();
}

template std::string to_string<Rational>(const PauliSumQ&);
template std::string to_string<double>(const PauliSumF&);

namespace {

void check_site(int j, int n) {
  if (j < 0 || j >= n) throw ValidationError("site index out of range");
}

}  // namespace

template <class C>
PauliSumT<C> make_generator(const GenRef& g, int n) {
  PauliSumT<C> out(n);
  const C half = CoeffTraits<C>::one() / CoeffTraits<C>::from_long(2);
  switch (g.kind) {
    case GenKind::R: {
      if (g.sites.size() != 2 || g.sites[0] == g.sites[1])
        throw ValidationError("R needs two distinct sites");
      int r = g.sites[0], s = g.sites[1];
      check_site(r, n);
      check_site(s, n);
      std::uint64_t mr = 1ull << r, ms = 1ull << s;
      out.add({mr | ms, 0}, half);            // X_r X_s
      out.add({mr | ms, mr | ms}, half);      // Y_r Y_s
      break;
    }
    case GenKind::T: {
      if (g.sites.size() != 2 || g.sites[0] == g.sites[1])
        throw ValidationError("T needs two distinct sites");
      int r = g.sites[0], s = g.sites[1];
      check_site(r, n);
      check_site(s, n);
      std::uint64_t mr = 1ull << r, ms = 1ull << s;
      out.add({mr | ms, ms}, half);           // X_r Y_s
      out.add({mr | ms, mr}, C(-half));       // -Y_r X_s
      break;
    }
    case GenKind::Zlocal: {
      if (g.sites.size() != 1) throw ValidationError("Zlocal needs one site");
      check_site(g.sites[0], n);
      out.add({0, 1ull << g.sites[0]}, CoeffTraits<C>::one());
      break;
    }
    case GenKind::Zmono: {
      std::uint64_t m = 0;
      for (int j : g.sites) {
        check_site(j, n);
        if (m & (1ull << j)) throw ValidationError("repeated site in Zmono");
        m |= 1ull << j;
      }
      out.add({0, m}, CoeffTraits<C>::one());
      break;
    }
  }
  return out;
}

template PauliSumQ make_generator<Rational>(const GenRef&, int);
template PauliSumF make_generator<double>(const GenRef&, int);

std::string gen_name(const GenRef& g) {
  std::ostringstream os;
  switch (g.kind) {
    case GenKind::R: os << "R"; break;
    case GenKind::T: os << "T"; break;
    case GenKind::Zlocal: os << "Z"; break;
    case GenKind::Zmono: os << "Zmono"; break;
  }
  os << "(";
  for (std::size_t i = 0; i < g.sites.size(); ++i) {
    if (i) os << ",";
    os << g.sites[i];
  }
  os << ")";
  return os.str();
}

PauliSumQ charge_operator(const SymmetrySpec& spec) {
  if (!spec.two_level()) throw ValidationError("charge operator needs a two-level spec");
  PauliSumQ q(spec.n());
  for (int j = 0; j < spec.n(); ++j) {
    Rational hj = (spec.sites[j][0] - spec.sites[j][1]) / 2;
    if (sgn(hj) != 0) q.add({0, 1ull << j}, hj);
  }
  return q;
}

template <class C>
bool is_symmetric(const PauliSumT<C>& a, const SymmetrySpec& spec) {
  if (spec.n() != a.n()) throw ValidationError("spec size mismatch");
  PauliSumQ qq = charge_operator(spec);
  PauliSumT<C> q(a.n());
  for (const auto& [p, c] : qq.terms()) {
    if constexpr (std::is_same_v<C, Rational>) {
      q.add(p, c);
    } else {
      q.add(p, c.get_d());
    }
  }
  return bracket(a, q).zero();
}

template bool is_symmetric<Rational>(const PauliSumQ&, const SymmetrySpec&);
template bool is_symmetric<double>(const PauliSumF&, const SymmetrySpec&);

PauliSumF to_float(const PauliSumQ& a) {
  PauliSumF out(a.n());
  for (const auto& [p, c] : a.terms()) out.add(p, c.get_d());
  return out;
}

}  // namespace symlie
