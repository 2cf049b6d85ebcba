// Charge vectors, character functions, twirling, weight-class tests, and
// trace-zero scans against closed forms and the dense oracle.

#include "symlie/symmetry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "oracle_dense.hpp"
#include "symlie/errors.hpp"

namespace {

using namespace symlie;

PauliSumQ from_terms(int n, std::initializer_list<std::pair<const char*, Rational>> terms) {
  PauliSumQ out(n);
  for (const auto& [s, c] : terms) out.add(pauli_from_string(s), c);
  return out;
}

PauliSumQ random_sum(int n, int terms, std::mt19937_64& rng, bool diagonal = false) {
  PauliSumQ out(n);
  std::uniform_int_distribution<std::uint64_t> mask(0, (1ULL << n) - 1);
  std::uniform_int_distribution<long> num(-9, 9);
  std::uniform_int_distribution<long> den(1, 9);
  for (int t = 0; t < terms; ++t)
    out.add(PauliString{diagonal ? 0 : mask(rng), mask(rng)}, rat(num(rng), den(rng)));
  return out;
}

TEST(SectorStructure, QubitMultiplicities) {
  SymmetrySpec spec = SymmetrySpec::qubits(3);
  auto mult = sector_multiplicities(spec);
  EXPECT_EQ(mult.at(Rational(3)), 1);
  EXPECT_EQ(mult.at(Rational(1)), 3);
  EXPECT_EQ(mult.at(Rational(-1)), 3);
  EXPECT_EQ(mult.at(Rational(-3)), 1);
  EXPECT_EQ(mult.size(), 4u);
}

TEST(SectorStructure, FullSymmetricDim) {
  EXPECT_EQ(full_symmetric_dim(SymmetrySpec::qubits(3)), 20);
  EXPECT_EQ(full_symmetric_dim(SymmetrySpec::qubits(1)), 2);
  EXPECT_EQ(full_symmetric_dim(SymmetrySpec::qudit_energy(2, 3)), 19);
  // Oracle: combinatorial count over dense charge lists.
  for (int n = 1; n <= 5; ++n)
    EXPECT_EQ(full_symmetric_dim(SymmetrySpec::qubits(n)),
              oracle::symmetric_dim_from_charges(oracle::qubit_charges(n)));
}

TEST(SectorStructure, IrrepCountAndGapBound) {
  SymmetrySpec spec = SymmetrySpec::qubits(6);
  for (int l = 1; l <= 6; ++l) EXPECT_EQ(irrep_count(spec, l), l + 1);
  EXPECT_EQ(dim_gap_bound(6, 2, spec), 4);
  SymmetrySpec qe = SymmetrySpec::qudit_energy(3, 3);
  // Qutrit chain: achievable sums 0..2l on l sites.
  EXPECT_EQ(irrep_count(qe, 2), 5);
  EXPECT_EQ(irrep_count(qe, 3), 7);
  EXPECT_EQ(dim_gap_bound(3, 2, qe), 2);
}

TEST(ChargeVector, SpecExamples) {
  SymmetrySpec spec2 = SymmetrySpec::qubits(2);
  PauliSumQ id = from_terms(2, {{"II", Rational(1)}});
  ChargeVector cv = charge_vector(id, spec2);
  EXPECT_EQ(cv.at(Rational(2)), Rational(1));
  EXPECT_EQ(cv.at(Rational(0)), Rational(2));
  EXPECT_EQ(cv.at(Rational(-2)), Rational(1));

  SymmetrySpec spec1 = SymmetrySpec::qubits(1);
  ChargeVector cz = charge_vector(from_terms(1, {{"Z", Rational(1)}}), spec1);
  EXPECT_EQ(cz.at(Rational(1)), Rational(1));
  EXPECT_EQ(cz.at(Rational(-1)), Rational(-1));

  ChargeVector czz = charge_vector(from_terms(2, {{"ZZ", Rational(1)}}), spec2);
  EXPECT_EQ(czz.at(Rational(2)), Rational(1));
  EXPECT_EQ(czz.at(Rational(0)), Rational(-2));
  EXPECT_EQ(czz.at(Rational(-2)), Rational(1));
}

TEST(ChargeVector, MatchesDenseSectorTraces) {
  // Independent path: dense matrix diagonal summed per sector charge.
  SymmetrySpec spec = SymmetrySpec::qubits(4);
  std::vector<double> charges = oracle::qubit_charges(4);
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    PauliSumQ a = random_sum(4, 5, rng);
    oracle::Mat m = oracle::pauli_sum(a);
    std::map<long, double> dense;
    for (long z = 0; z < 16; ++z) dense[lround(charges[z])] += m(z, z).real();
    ChargeVector cv = charge_vector(a, spec);
    for (const auto& [q, v] : dense)
      EXPECT_NEAR(to_double(cv.at(Rational(q))), v, 1e-10) << "sector " << q;
  }
}

TEST(ChargeVector, TraceAndBracketInvariants) {
  SymmetrySpec spec = SymmetrySpec::qubits(4);
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 10; ++rep) {
    PauliSumQ a = random_sum(4, 4, rng);
    ChargeVector cv = charge_vector(a, spec);
    // Sum over sectors = trace (identity coefficient times 2^n).
    Rational tr = a.coeff(PauliString{}) * Rational(16);
    EXPECT_EQ(cv.trace(), tr);
    // The charge vector of a bracket with a symmetric operator vanishes.
    PauliSumQ b = make_generator<Rational>({GenKind::R, {1, 3}}, 4);
    EXPECT_TRUE(charge_vector(bracket(a, b), spec).zero());
    PauliSumQ c = make_generator<Rational>({GenKind::Zmono, {0, 2}}, 4);
    EXPECT_TRUE(charge_vector(bracket(a, c), spec).zero());
  }
}

TEST(ChargeVector, SitePermutationInvariance) {
  SymmetrySpec spec = SymmetrySpec::qubits(3);
  PauliSumQ a = from_terms(3, {{"ZXI", rat(2, 3)}, {"IYZ", rat(-1, 2)}});
  PauliSumQ b = from_terms(3, {{"XZI", rat(2, 3)}, {"YIZ", rat(-1, 2)}});  // swap sites 0,1
  ChargeVector ca = charge_vector(a, spec), cb = charge_vector(b, spec);
  EXPECT_EQ(ca.sectors, cb.sectors);
}

TEST(CharacterFunction, ClosedForms) {
  SymmetrySpec spec = SymmetrySpec::qubits(3);
  PauliSumQ zb = from_terms(3, {{"ZIZ", Rational(1)}});  // w(b) = 2
  for (double theta : {0.1, 0.7, 2.0}) {
    std::complex<double> got = character_function(zb, spec, theta);
    std::complex<double> want =
        8.0 * std::cos(theta) * std::pow(std::complex<double>(0, std::sin(theta)), 2);
    EXPECT_LT(std::abs(got - want), 1e-12);
  }
  PauliSumQ id = from_terms(2, {{"II", Rational(1)}});
  SymmetrySpec spec2 = SymmetrySpec::qubits(2);
  for (double theta : {0.3, 1.1}) {
    EXPECT_LT(std::abs(character_function(id, spec2, theta) -
                       std::complex<double>(std::pow(2 * std::cos(theta), 2))),
              1e-12);
    // Z1 Z2: -4 sin^2(theta) = 2 cos(2 theta) - 2.
    PauliSumQ zz = from_terms(2, {{"ZZ", Rational(1)}});
    std::complex<double> got = character_function(zz, spec2, theta);
    EXPECT_LT(std::abs(got - std::complex<double>(-4 * std::pow(std::sin(theta), 2))), 1e-12);
    EXPECT_LT(std::abs(got - std::complex<double>(2 * std::cos(2 * theta) - 2)), 1e-12);
  }
}

TEST(CharacterFunction, MatchesChargeVectorSum) {
  SymmetrySpec spec = SymmetrySpec::qubits(4);
  std::mt19937_64 rng(31);
  PauliSumQ a = random_sum(4, 6, rng);
  ChargeVector cv = charge_vector(a, spec);
  for (double theta = 0; theta < 6.3; theta += 0.37) {
    std::complex<double> want = 0;
    for (const auto& [q, v] : cv.sectors)
      want += to_double(v) * std::exp(std::complex<double>(0, to_double(q) * theta));
    EXPECT_LT(std::abs(character_function(a, spec, theta) - want), 1e-12);
  }
}

TEST(Twirl, SpecExamples) {
  SymmetrySpec spec = SymmetrySpec::qubits(2);
  PauliSumQ r = make_generator<Rational>({GenKind::R, {0, 1}}, 2);
  EXPECT_EQ(twirl(r, spec), r);
  PauliSumQ x1 = from_terms(2, {{"XI", Rational(1)}});
  EXPECT_TRUE(twirl(x1, spec).zero());
  PauliSumQ xx = from_terms(2, {{"XX", Rational(1)}});
  EXPECT_EQ(twirl(xx, spec), r);
}

TEST(Twirl, Invariants) {
  SymmetrySpec spec = SymmetrySpec::qubits(4);
  std::mt19937_64 rng(37);
  for (int rep = 0; rep < 15; ++rep) {
    PauliSumQ a = random_sum(4, 5, rng);
    PauliSumQ ta = twirl(a, spec);
    EXPECT_TRUE(is_symmetric(ta, spec));
    EXPECT_EQ(twirl(ta, spec), ta);  // idempotent
    EXPECT_EQ(ta.support() & ~a.support(), 0u);
    // Linearity.
    PauliSumQ b = random_sum(4, 5, rng);
    EXPECT_EQ(twirl(a + b, spec), twirl(a, spec) + twirl(b, spec));
  }
}

TEST(SkTest, SpecExamples) {
  PauliSumQ zzz = from_terms(3, {{"ZZZ", Rational(1)}});
  SkReport r = s_k_test(zzz, 2);
  EXPECT_FALSE(r.pass);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations.at(3), Rational(1));

  EXPECT_TRUE(s_k_test(zzz, 3).pass);

  PauliSumQ diff = from_terms(4, {{"ZZZI", Rational(1)}, {"ZZIZ", Rational(-1)}});
  EXPECT_TRUE(s_k_test(diff, 2).pass);

  PauliSumQ offdiag = from_terms(2, {{"XX", Rational(1)}});
  EXPECT_THROW(s_k_test(offdiag, 1), ValidationError);
}

TEST(ChargeSpan, SpecExamples) {
  SymmetrySpec spec = SymmetrySpec::qubits(3);
  std::vector<PauliSumQ> gens;
  for (int j = 0; j < 3; ++j) gens.push_back(make_generator<Rational>({GenKind::Zlocal, {j}}, 3));
  for (int j = 0; j < 3; ++j)
    for (int k = j + 1; k < 3; ++k) {
      gens.push_back(make_generator<Rational>({GenKind::R, {j, k}}, 3));
      gens.push_back(make_generator<Rational>({GenKind::Zmono, {j, k}}, 3));
    }
  gens.push_back(make_generator<Rational>({GenKind::Zmono, {}}, 3));
  for (const auto& g : gens) EXPECT_TRUE(charge_span_test(g, gens, spec));
  PauliSumQ zzz = from_terms(3, {{"ZZZ", Rational(1)}});
  EXPECT_FALSE(charge_span_test(zzz, gens, spec));
  // The top-sector projector (I+Z)/2 per site expanded: charge vector is a
  // sector indicator outside the 2-local span.
  PauliSumQ proj = from_terms(3, {{"III", rat(1, 8)},
                                  {"ZII", rat(1, 8)},
                                  {"IZI", rat(1, 8)},
                                  {"IIZ", rat(1, 8)},
                                  {"ZZI", rat(1, 8)},
                                  {"ZIZ", rat(1, 8)},
                                  {"IZZ", rat(1, 8)},
                                  {"ZZZ", rat(1, 8)}});
  EXPECT_FALSE(charge_span_test(proj, gens, spec));
}

TEST(SkDimension, QubitsKPlusOne) {
  SymmetrySpec spec4 = SymmetrySpec::qubits(4);
  EXPECT_EQ(s_k_dimension(4, 2, spec4), 3);
  EXPECT_THROW(s_k_dimension(4, 0, spec4), ValidationError);
  SymmetrySpec spec6 = SymmetrySpec::qubits(6);
  EXPECT_EQ(s_k_dimension(6, 5, spec6), 6);
}

TEST(TraceZero, QubitRoots) {
  SymmetrySpec spec = SymmetrySpec::qubits(3);
  TraceZeroReport r = trace_zero_scan(spec, 2, 3);
  ASSERT_EQ(r.zeros.size(), 2u);
  EXPECT_NEAR(r.zeros[0], std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(r.zeros[1], 3 * std::numbers::pi / 2, 1e-12);
  EXPECT_TRUE(r.exact);
  EXPECT_TRUE(r.flag);
  // k = n never flags.
  EXPECT_FALSE(trace_zero_scan(spec, 3, 3).flag);
}

TEST(TraceZero, SingleChargeAndQutrit) {
  SymmetrySpec flat;
  flat.sites.assign(2, {Rational(0)});
  TraceZeroReport r = trace_zero_scan(flat, 1, 2);
  EXPECT_TRUE(r.zeros.empty());
  EXPECT_FALSE(r.flag);

  SymmetrySpec qe = SymmetrySpec::qudit_energy(2, 3);
  TraceZeroReport q = trace_zero_scan(qe, 1, 2);
  ASSERT_EQ(q.zeros.size(), 2u);
  EXPECT_NEAR(q.zeros[0], 2 * std::numbers::pi / 3, 1e-10);
  EXPECT_NEAR(q.zeros[1], 4 * std::numbers::pi / 3, 1e-10);
  EXPECT_TRUE(q.flag);
}

TEST(DiagonalTable, WalshExamples) {
  std::vector<Rational> ones(4, Rational(1));
  PauliSumQ id = diagonal_table_to_pauli(ones, 2);
  PauliSumQ wantid(2);
  wantid.add(PauliString{}, Rational(1));
  EXPECT_EQ(id, wantid);

  // h(z) = (-1)^{z_1} with site 0 the most significant bit.
  std::vector<Rational> par = {Rational(1), Rational(1), Rational(-1), Rational(-1)};
  PauliSumQ z1 = diagonal_table_to_pauli(par, 2);
  EXPECT_EQ(z1, from_terms(2, {{"ZI", Rational(1)}}));

  std::vector<Rational> ind = {Rational(0), Rational(0), Rational(0), Rational(1)};
  PauliSumQ proj = diagonal_table_to_pauli(ind, 2);
  EXPECT_EQ(proj, from_terms(2, {{"II", rat(1, 4)},
                                 {"ZI", rat(-1, 4)},
                                 {"IZ", rat(-1, 4)},
                                 {"ZZ", rat(1, 4)}}));
}

TEST(DiagonalTable, RoundTripAgainstDense) {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<long> num(-9, 9);
  int n = 3;
  std::vector<Rational> table(1 << n);
  for (auto& v : table) v = rat(num(rng), 4);
  PauliSumQ h = diagonal_table_to_pauli(table, n);
  oracle::Mat m = oracle::pauli_sum(h);
  for (long z = 0; z < (1 << n); ++z) EXPECT_NEAR(m(z, z).real(), to_double(table[z]), 1e-12);
}

TEST(SkTest, AgreesWithChargeSpan) {
  // Necessity direction of the weight-class test against the span test.
  for (int n : {3, 4}) {
    SymmetrySpec spec = SymmetrySpec::qubits(n);
    std::vector<PauliSumQ> gens;
    gens.push_back(make_generator<Rational>({GenKind::Zmono, {}}, n));
    for (int j = 0; j < n; ++j)
      gens.push_back(make_generator<Rational>({GenKind::Zlocal, {j}}, n));
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        gens.push_back(make_generator<Rational>({GenKind::Zmono, {j, k}}, n));
    std::mt19937_64 rng(43u + n);
    for (int rep = 0; rep < 40; ++rep) {
      PauliSumQ h = random_sum(n, 4, rng, /*diagonal=*/true);
      EXPECT_EQ(s_k_test(h, 2).pass, charge_span_test(h, gens, spec));
    }
  }
}

}  // namespace
