// Microbenchmarks for the hot paths: bracket arithmetic, closure sweeps,
// charge vectors, and dense exponentials.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "symlie/densesim.hpp"
#include "symlie/lie_closure.hpp"
#include "symlie/pauli_core.hpp"
#include "symlie/symmetry.hpp"

namespace {

using namespace symlie;

PauliSumQ chain_hops(int n) {
  PauliSumQ h(n);
  for (int j = 0; j + 1 < n; ++j) h += make_generator<Rational>({GenKind::R, {j, j + 1}}, n);
  return h;
}

PauliSumQ chain_zz(int n) {
  PauliSumQ h(n);
  for (int j = 0; j + 1 < n; ++j) {
    std::uint64_t m = (1ull << j) | (1ull << (j + 1));
    h.add({0, m}, Rational(1));
  }
  return h;
}

void BM_Bracket(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  PauliSumQ a = chain_hops(n);
  PauliSumQ b = chain_zz(n);
  for (auto _ : state) {
    PauliSumQ c = bracket(a, b);
    benchmark::DoNotOptimize(c);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(a.size() * b.size()));
}
BENCHMARK(BM_Bracket)->Arg(6)->Arg(10)->Arg(14);

void BM_Closure(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  SymmetrySpec spec = SymmetrySpec::qubits(n);
  std::vector<PauliSumQ> gens = klocal_symmetric_basis(n, 2, spec);
  for (auto _ : state) {
    LieBasis basis = close(gens, spec);
    benchmark::DoNotOptimize(basis.dimension());
  }
}
BENCHMARK(BM_Closure)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_ChargeVector(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  SymmetrySpec spec = SymmetrySpec::qubits(n);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> num(-9, 9);
  PauliSumQ h(n);
  for (std::uint64_t b = 1; b < (1ull << n); ++b) h.add({0, b}, Rational(num(rng)));
  for (auto _ : state) {
    ChargeVector v = charge_vector(h, spec);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_ChargeVector)->Arg(6)->Arg(10);

void BM_ExpmUnitary(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  PauliSumQ h = chain_hops(n);
  h += chain_zz(n);
  Matrix m = to_matrix(h);
  for (auto _ : state) {
    Matrix u = expm_unitary(m, 0.7);
    benchmark::DoNotOptimize(u);
  }
}
BENCHMARK(BM_ExpmUnitary)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
