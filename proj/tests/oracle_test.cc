// Sanity checks for the dense reference implementations themselves.

#include "oracle_dense.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace {

using namespace oracle;

TEST(Oracle, SinglePauliAlgebra) {
  Mat x = pauli1(1), y = pauli1(2), z = pauli1(3), id = pauli1(0);
  EXPECT_LT(maxabs(x * x - id), 1e-15);
  EXPECT_LT(maxabs(y * y - id), 1e-15);
  EXPECT_LT(maxabs(z * z - id), 1e-15);
  EXPECT_LT(maxabs(comm(x, y) - Cx(0, 2) * z), 1e-15);
  EXPECT_LT(maxabs(x * y - Cx(0, 1) * z), 1e-15);
}

TEST(Oracle, StringSiteOrder) {
  // "ZI" acts on the most significant qubit: diag(1, 1, -1, -1).
  symlie::PauliString p = symlie::pauli_from_string("ZI");
  Mat m = pauli_string(p, 2);
  EXPECT_NEAR(m(0, 0).real(), 1, 1e-15);
  EXPECT_NEAR(m(1, 1).real(), 1, 1e-15);
  EXPECT_NEAR(m(2, 2).real(), -1, 1e-15);
  EXPECT_NEAR(m(3, 3).real(), -1, 1e-15);
}

TEST(Oracle, TaylorExponentialRotation) {
  // exp(-i theta Z/2) = diag(e^{-i theta/2}, e^{+i theta/2}).
  double theta = 0.813;
  Mat u = expm_taylor(0.5 * pauli1(3), theta);
  EXPECT_LT(std::abs(u(0, 0) - std::exp(Cx(0, -theta / 2))), 1e-14);
  EXPECT_LT(std::abs(u(1, 1) - std::exp(Cx(0, theta / 2))), 1e-14);
  EXPECT_LT(std::abs(u(0, 1)), 1e-15);
  // Unitarity for a larger random Hermitian.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1, 1);
  Mat h = Mat::Zero(8, 8);
  for (int r = 0; r < 8; ++r)
    for (int c = r; c < 8; ++c) {
      Cx v(dist(rng), r == c ? 0.0 : dist(rng));
      h(r, c) = v;
      h(c, r) = std::conj(v);
    }
  Mat u8 = expm_taylor(h, 1.37);
  EXPECT_LT(maxabs(u8 * u8.adjoint() - Mat::Identity(8, 8)), 1e-12);
}

TEST(Oracle, HermSpanRank) {
  HermSpan span;
  EXPECT_TRUE(span.insert(pauli1(1)));
  EXPECT_TRUE(span.insert(pauli1(2)));
  EXPECT_FALSE(span.insert(3.0 * pauli1(1)));
  EXPECT_TRUE(span.insert(pauli1(1) + pauli1(3)));
  EXPECT_EQ(span.rank(), 3);
}

TEST(Oracle, LieClosureSu2) {
  // {X, Y} generates su(2) plus nothing else: dimension 3.
  EXPECT_EQ(lie_closure_dim({pauli1(1), pauli1(2)}, 10), 3);
  // Adding the identity keeps it at 4 (the center never grows brackets).
  EXPECT_EQ(lie_closure_dim({pauli1(0), pauli1(1), pauli1(2)}, 10), 4);
}

TEST(Oracle, SymmetricDimFromCharges) {
  // Two qubits: charges {2, 0, 0, -2} -> 1 + 4 + 1 = 6.
  EXPECT_EQ(symmetric_dim_from_charges(qubit_charges(2)), 6);
  // Three qubits: 1 + 9 + 9 + 1 = 20.
  EXPECT_EQ(symmetric_dim_from_charges(qubit_charges(3)), 20);
}

TEST(Oracle, FLadderIdentity) {
  // [F(r3, r2), F(r2, r1)] = F(r3, r1) exactly, for plain commutators.
  long dim = 9;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long> pick(0, dim - 1);
  for (int rep = 0; rep < 20; ++rep) {
    long r1 = pick(rng), r2 = pick(rng), r3 = pick(rng);
    if (r1 == r2 || r2 == r3 || r1 == r3) continue;
    Mat lhs = comm(f_op(dim, r3, r2), f_op(dim, r2, r1));
    EXPECT_LT(maxabs(lhs - f_op(dim, r3, r1)), 1e-15);
  }
}

}  // namespace
