// End-to-end acceptance checks. Each test covers one numbered requirement and
// prints a single [criterion N] PASS/FAIL line; the assertions behind the
// line carry the details. Tolerances and runtime limits are asserted, not
// assumed.

#include <gtest/gtest.h>

#include <bit>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <random>
#include <vector>

#include "symlie/compiler.hpp"
#include "symlie/densesim.hpp"
#include "symlie/errors.hpp"
#include "symlie/json_io.hpp"
#include "symlie/lie_closure.hpp"
#include "symlie/qudit_energy.hpp"
#include "symlie/symmetry.hpp"

namespace {

using namespace symlie;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int index, const char* label) {
  bool pass = !::testing::Test::HasFailure();
  std::printf("[criterion %d] %s: %s\n", index, label, pass ? "PASS" : "FAIL");
  std::fflush(stdout);
}

long binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long v = 1;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

long symmetric_dim_formula(int n) {
  long s = 0;
  for (int w = 0; w <= n; ++w) s += binom(n, w) * binom(n, w);
  return s;
}

std::string z_string(int n, std::uint64_t mask) {
  std::string s(static_cast<std::size_t>(n), 'I');
  for (int j = 0; j < n; ++j)
    if (mask >> j & 1) s[static_cast<std::size_t>(j)] = 'Z';
  return s;
}

PauliSumQ random_diagonal(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<long> num(-9, 9), den(1, 9);
  PauliSumQ h(n);
  for (std::uint64_t b = 1; b < (1ull << n); ++b)
    h.add(pauli_from_string(z_string(n, b)), rat(num(rng), den(rng)));
  return h;
}

// Zeroes the coefficient sum of every weight class above k, which is exactly
// the pass condition of the weight-class test.
PauliSumQ constrained_diagonal(int n, int k, std::mt19937_64& rng) {
  PauliSumQ h = random_diagonal(n, rng);
  for (int w = k + 1; w <= n; ++w) {
    Rational sum(0);
    long count = 0;
    for (std::uint64_t b = 1; b < (1ull << n); ++b)
      if (std::popcount(b) == w) {
        sum += h.coeff(pauli_from_string(z_string(n, b)));
        ++count;
      }
    Rational mean = sum / Rational(count);
    for (std::uint64_t b = 1; b < (1ull << n); ++b)
      if (std::popcount(b) == w) h.add(pauli_from_string(z_string(n, b)), Rational(0) - mean);
  }
  return h;
}

Matrix swap_matrix(int j, int k, int m) {
  long dim = 1L << m;
  Matrix s = Matrix::Zero(dim, dim);
  for (long z = 0; z < dim; ++z) {
    long bj = z >> (m - 1 - j) & 1, bk = z >> (m - 1 - k) & 1;
    long w = z & ~(1L << (m - 1 - j)) & ~(1L << (m - 1 - k));
    w |= bj << (m - 1 - k);
    w |= bk << (m - 1 - j);
    s(w, z) = 1;
  }
  return s;
}

TEST(Acceptance, Criterion01DimensionGapBound) {
  auto t0 = Clock::now();
  for (int n = 2; n <= 6; ++n) {
    SymmetrySpec spec = SymmetrySpec::qubits(n);
    DimensionReport rep = dimension_report(n, 1, n, spec);
    ASSERT_EQ(rep.rows.size(), static_cast<std::size_t>(n));
    long dim_n = rep.rows.back().dim;
    EXPECT_EQ(dim_n, symmetric_dim_formula(n)) << "n=" << n;
    EXPECT_EQ(dim_n, full_symmetric_dim(spec)) << "n=" << n;
    for (int k = 1; k < n; ++k)
      EXPECT_GE(dim_n - rep.rows[static_cast<std::size_t>(k - 1)].dim, n - k)
          << "n=" << n << " k=" << k;
  }
  EXPECT_LT(seconds_since(t0), 300.0);
  report(1, "dimension gap bound, qubits n=2..6, exact");
}

TEST(Acceptance, Criterion02FineGrainedMonotonicity) {
  for (int n = 1; n <= 5; ++n) {
    SymmetrySpec spec = SymmetrySpec::qubits(n);
    DimensionReport rep = dimension_report(n, 1, n, spec);
    for (int k = 1; k <= n; ++k)
      for (int l = k; l <= n; ++l) {
        const DimensionRow& rk = rep.rows[static_cast<std::size_t>(k - 1)];
        const DimensionRow& rl = rep.rows[static_cast<std::size_t>(l - 1)];
        if (rk.irreps < rl.irreps) {
          EXPECT_LT(rk.dim, rl.dim) << "n=" << n << " k=" << k << " l=" << l;
        }
      }
    EXPECT_TRUE(rep.pairwise_ok) << "n=" << n;
  }
  report(2, "strict dimension increase with the irrep count, n<=5");
}

TEST(Acceptance, Criterion03ChargeSpanDimension) {
  for (int n = 1; n <= 6; ++n) {
    SymmetrySpec spec = SymmetrySpec::qubits(n);
    for (int k = 1; k <= n; ++k)
      EXPECT_EQ(s_k_dimension(n, k, spec), k + 1) << "n=" << n << " k=" << k;
  }
  report(3, "charge-vector span dimension k+1, n<=6");
}

TEST(Acceptance, Criterion04DiagonalMembershipIff) {
  auto t0 = Clock::now();
  std::mt19937_64 rng(20260818);
  const int k = 2;
  for (int n = 3; n <= 5; ++n) {
    SymmetrySpec spec = SymmetrySpec::qubits(n);
    LieBasis basis = close(klocal_symmetric_basis(n, k, spec), spec);

    for (int trial = 0; trial < 25; ++trial) {
      PauliSumQ h = constrained_diagonal(n, k, rng);
      ASSERT_TRUE(s_k_test(h, k).pass);
      MemberReport<Rational> rep = basis.member(h);
      EXPECT_TRUE(rep.member) << "n=" << n << " trial=" << trial;
      EXPECT_EQ(sgn(rep.residual), 0) << "n=" << n << " trial=" << trial;
    }

    for (std::uint64_t b = 1; b < (1ull << n); ++b)
      if (std::popcount(b) > k) {
        PauliSumQ zb(n);
        zb.add(pauli_from_string(z_string(n, b)), Rational(1));
        EXPECT_FALSE(basis.member(zb).member) << "n=" << n << " b=" << b;
      }

    for (int trial = 0; trial < 100; ++trial) {
      PauliSumQ h = random_diagonal(n, rng);
      EXPECT_EQ(basis.member(h).member, s_k_test(h, k).pass) << "n=" << n << " trial=" << trial;
    }
  }
  EXPECT_LT(seconds_since(t0), 120.0);
  report(4, "diagonal closure membership iff weight-class test, n=3..5, k=2");
}

TEST(Acceptance, Criterion05ChainIdentities) {
  std::mt19937_64 rng(5);
  std::map<int, int> sign_of_v;
  for (int v = 2; v <= 6; ++v) {
    int n_total = v + 2;
    std::vector<int> all(static_cast<std::size_t>(n_total));
    for (int j = 0; j < n_total; ++j) all[static_cast<std::size_t>(j)] = j;
    for (int trial = 0; trial < 10; ++trial) {
      std::shuffle(all.begin(), all.end(), rng);
      ChainSpec chain;
      chain.sites.assign(all.begin(), all.begin() + v);
      chain.n_total = n_total;
      ChainResult r = chain_hamiltonian(chain);
      EXPECT_EQ(r.realized, Rational(r.sign) * r.target) << "v=" << v;
      std::vector<PauliSumQ> gens;
      for (const GenRef& g : r.leaves) gens.push_back(make_generator<Rational>(g, n_total));
      EXPECT_EQ(evaluate_expr(*r.tree, gens), r.realized) << "v=" << v;
      auto it = sign_of_v.find(v);
      if (it == sign_of_v.end())
        sign_of_v[v] = r.sign;
      else
        EXPECT_EQ(it->second, r.sign) << "inconsistent sign at v=" << v;
    }
  }
  report(5, "nested chain identity with a consistent sign, v=2..6");
}

TEST(Acceptance, Criterion06AncillaSectorIdentity) {
  PauliSumF lhs_h(4);
  lhs_h.add(pauli_from_string("ZZZI"), 1.0);
  lhs_h.add(pauli_from_string("ZZIZ"), -1.0);
  PauliSumF rhs_h(3);
  rhs_h.add(pauli_from_string("ZZZ"), 1.0);
  rhs_h.add(pauli_from_string("ZZI"), -1.0);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  for (int trial = 0; trial < 20; ++trial) {
    double theta = angle(rng);
    Matrix ul = expm_unitary(to_matrix(lhs_h), -theta);
    Matrix ur = expm_unitary(to_matrix(rhs_h), -theta);
    Vector psi(8);
    for (int i = 0; i < 8; ++i) psi(i) = std::complex<double>(gauss(rng), gauss(rng));
    psi.normalize();
    Vector in = Vector::Zero(16);
    for (int i = 0; i < 8; ++i) in(2 * i) = psi(i);
    Vector out = ul * in;
    Vector want = ur * psi;
    double worst = 0;
    for (int i = 0; i < 8; ++i) {
      worst = std::max(worst, std::abs(out(2 * i) - want(i)));
      worst = std::max(worst, std::abs(out(2 * i + 1)));
    }
    EXPECT_LE(worst, 1e-12) << "trial=" << trial;
  }
  report(6, "ancilla loop equals the diagonal difference on the 0 sector");
}

TEST(Acceptance, Criterion07EndToEndCompile) {
  auto t0 = Clock::now();
  // exp(i 0.7 Z1Z2Z3) = exp(-i h t) with h = -ZZZ, t = 0.7.
  PauliSumQ h(3);
  h.add(pauli_from_string("ZZZ"), Rational(-1));
  CircuitPlan plan = diagonal_with_ancilla(h, 3, 0.7);
  VerifyReport hv = verify_plan(plan, to_float(h), 0.7, 1e-10);
  EXPECT_TRUE(hv.pass);
  EXPECT_LE(hv.sector_distance, 1e-10);

  ExpandReport rep = expand_to_pulses(plan, 1e-2);
  EXPECT_LE(rep.measured_error, 1e-2);
  VerifyReport pv = verify_plan(rep.plan, to_float(h), 0.7, 1e-2);
  EXPECT_TRUE(pv.pass);
  EXPECT_LE(pv.sector_distance, 1e-2);
  EXPECT_LE(pv.leakage, 1e-2);
  EXPECT_LT(seconds_since(t0), 60.0);
  report(7, "compiled exp(i 0.7 ZZZ) meets 1e-2 at pulse level, 1e-10 at hamiltonian level");
}

TEST(Acceptance, Criterion08DiagonalPlusHoppingGenerates) {
  for (int n = 3; n <= 4; ++n) {
    SymmetrySpec spec = SymmetrySpec::qubits(n);
    std::vector<PauliSumQ> gens;
    for (std::uint64_t b = 0; b < (1ull << n); ++b) {
      std::vector<int> sites;
      for (int j = 0; j < n; ++j)
        if (b >> j & 1) sites.push_back(j);
      gens.push_back(make_generator<Rational>(GenRef{GenKind::Zmono, sites}, n));
    }
    for (int j = 0; j + 1 < n; ++j)
      gens.push_back(make_generator<Rational>(GenRef{GenKind::R, {j, j + 1}}, n));
    LieBasis basis = close(gens, spec);
    EXPECT_TRUE(basis.closed());
    EXPECT_EQ(basis.dimension(), static_cast<std::size_t>(full_symmetric_dim(spec)));
    EXPECT_EQ(basis.dimension(), static_cast<std::size_t>(symmetric_dim_formula(n)));
  }
  report(8, "diagonal operators with neighbor hopping close to the full symmetric algebra");
}

TEST(Acceptance, Criterion09GeometryRouting) {
  // Swap pulses realize the exact permutation.
  for (auto [j, k] : std::vector<std::pair<int, int>>{{0, 1}, {1, 3}, {2, 0}}) {
    CircuitPlan plan;
    plan.n = 4;
    plan.level = PlanLevel::pulse;
    double phase = 0;
    plan.steps = swap_pulses(j, k, 4, phase);
    plan.phase = phase;
    Matrix u = run_plan(plan);
    EXPECT_LE((u - swap_matrix(j, k, 4)).cwiseAbs().maxCoeff(), 1e-12) << j << "," << k;
  }

  // Conjugating by a swap relabels the sites of the evolution.
  PauliSumF h(3);
  h.add(pauli_from_string("ZZI"), 0.7);
  h.add(pauli_from_string("XXI"), 0.25);
  h.add(pauli_from_string("YYI"), 0.25);
  PauliSumF h_relabeled(3);
  h_relabeled.add(pauli_from_string("IZZ"), 0.7);
  h_relabeled.add(pauli_from_string("IXX"), 0.25);
  h_relabeled.add(pauli_from_string("IYY"), 0.25);
  Matrix s02 = swap_matrix(0, 2, 3);
  Matrix u = expm_unitary(to_matrix(h), 0.9);
  Matrix want = expm_unitary(to_matrix(h_relabeled), 0.9);
  EXPECT_LE((s02 * u * s02.adjoint() - want).cwiseAbs().maxCoeff(), 1e-12);

  // Long-range coupling routed onto a nearest-neighbor chain.
  CircuitPlan plan;
  plan.n = 4;
  plan.level = PlanLevel::pulse;
  plan.epsilon = 1e-6;
  plan.primitive_set = "generators";
  plan.primitives = {GenRef{GenKind::Zmono, {0, 3}}};
  plan.steps = {pulse_step(GenRef{GenKind::Zmono, {0, 3}}, 4, 0.8)};
  CircuitPlan routed = swap_route(plan, Geometry::chain_zz);
  for (const PlanStep& st : routed.steps) {
    ASSERT_TRUE(st.gen.has_value());
    EXPECT_TRUE(geometry_allows(*st.gen, Geometry::chain_zz, 4, 0));
  }
  PauliSumF target(4);
  target.add(pauli_from_string("ZIIZ"), 1.0);
  VerifyReport v = verify_plan(routed, target, 0.8);
  EXPECT_TRUE(v.pass);
  EXPECT_LE(v.sector_distance, 1e-6);
  report(9, "swap identity, conjugation relabeling, and routed long-range coupling");
}

TEST(Acceptance, Criterion10QuditSuite) {
  auto t0 = Clock::now();
  // Every interaction commutes exactly with the intrinsic Hamiltonian.
  {
    QuditSpec qs;
    qs.n = 2;
    qs.d = 3;
    qs.ancillas = 1;
    Matrix htot = to_matrix(intrinsic_hamiltonian(qs));
    std::vector<QuditGen> gens;
    for (int j = 0; j < 2; ++j)
      for (int l = 1; l < 3; ++l) gens.push_back({QuditGenKind::hop_star, {j, 2}, {l}});
    for (int l = 1; l < 3; ++l)
      for (int lp = 1; lp < 3; ++lp) gens.push_back({QuditGenKind::hop_pair, {0, 1}, {l, lp}});
    for (int j = 0; j < 2; ++j)
      for (int l = 1; l < 3; ++l) gens.push_back({QuditGenKind::z_level, {j}, {l}});
    gens.push_back({QuditGenKind::z_ancilla, {2}, {}});
    for (const QuditGen& g : gens) {
      Matrix m = to_matrix(build_interaction(qs, g));
      EXPECT_EQ((m * htot - htot * m).cwiseAbs().maxCoeff(), 0.0) << gen_name(g);
    }
  }

  // Two-ancilla reduction is exact for d = 2 and d = 3.
  for (auto [d, l, lp] : std::vector<std::tuple<int, int, int>>{{2, 1, 1}, {3, 1, 2}, {3, 2, 2}}) {
    QuditSpec qs;
    qs.n = 2;
    qs.d = d;
    qs.ancillas = 2;
    TwoAncillaReduction r = two_ancilla_reduce(qs, 0, 1, l, lp);
    EXPECT_TRUE(r.identity_ok);
    EXPECT_EQ(r.max_abs_diff, 0.0);
  }

  // Diagonal code transform round trips exactly for d <= 4, n <= 3.
  {
    std::mt19937_64 rng(10);
    std::uniform_int_distribution<long> num(-9, 9);
    for (int d = 2; d <= 4; ++d)
      for (int n = 1; n <= 3; ++n) {
        long size = 1;
        for (int j = 0; j < n; ++j) size *= d;
        for (int trial = 0; trial < 3; ++trial) {
          std::vector<Rational> table(static_cast<std::size_t>(size));
          for (auto& v : table) v = rat(num(rng), 7);
          auto codes = qudit_diag_decompose(table, n, d);
          EXPECT_EQ(qudit_diag_reconstruct(codes, n, d), table) << "d=" << d << " n=" << n;
        }
      }
  }

  // The conserving algebra reaches the multiplicity-square sum.
  {
    QuditSpec qs;
    qs.n = 2;
    qs.d = 3;
    EnergyAlgebraReport rep = energy_algebra_dim(qs);
    EXPECT_EQ(rep.dim, 19);
    EXPECT_TRUE(rep.closure_checked);
    EXPECT_TRUE(rep.closure_ok);
    EXPECT_EQ(rep.closure_dim, 19);
  }

  // Compiled transfer between the degenerate states |0,2> and |1,1>.
  {
    QuditSpec qs;
    qs.n = 2;
    qs.d = 3;
    qs.ancillas = 1;
    QuditOperator h = qudit_operator(
        {3, 3}, {{2, 4, std::complex<double>(0, 0.6)}, {4, 2, std::complex<double>(0, -0.6)}});
    double t = 0.2;
    QuditPlan plan = qudit_synthesize(h, qs, t);
    bool expanded = false;
    try {
      QuditExpandReport rep = qudit_expand_to_pulses(plan, 1e-2);
      expanded = true;
      EXPECT_LE(rep.measured_error, 1e-2);
      QuditVerifyReport v = verify_qudit_plan(rep.plan, h, t);
      EXPECT_TRUE(v.pass);
      EXPECT_LE(v.sector_distance, 1e-2);
      EXPECT_LE(v.leakage, 1e-2);
    } catch (const BudgetError& e) {
      std::printf("[criterion 10] pulse budget exhausted (%s); verifying at hamiltonian level\n",
                  e.what());
    }
    if (!expanded) {
      QuditVerifyReport v = verify_qudit_plan(plan, h, t, 1e-2);
      EXPECT_TRUE(v.pass);
      EXPECT_LE(v.sector_distance, 1e-2);
    }
  }
  EXPECT_LT(seconds_since(t0), 180.0);
  report(10, "qudit interactions, reductions, closure dimension, and compiled demo");
}

TEST(Acceptance, Criterion11TraceZeroScan) {
  const double half_pi = 1.5707963267948966;
  for (int n = 2; n <= 6; ++n) {
    SymmetrySpec spec = SymmetrySpec::qubits(n);
    DimensionReport rep = dimension_report(n, 1, n, spec);
    for (int k = 1; k <= n; ++k) {
      TraceZeroReport tz = trace_zero_scan(spec, k, n);
      EXPECT_TRUE(tz.exact) << "n=" << n << " k=" << k;
      bool has_half_pi = false;
      for (double z : tz.zeros) has_half_pi = has_half_pi || std::abs(z - half_pi) <= 1e-12;
      EXPECT_TRUE(has_half_pi) << "n=" << n << " k=" << k;
      EXPECT_EQ(tz.flag, k < n) << "n=" << n << " k=" << k;
      if (k < n) {
        long gap = rep.rows.back().dim - rep.rows[static_cast<std::size_t>(k - 1)].dim;
        EXPECT_GT(gap, 0) << "n=" << n << " k=" << k;
      }
    }
  }
  report(11, "trace zero at pi/2 flags non-universality for every k < n");
}

}  // namespace
