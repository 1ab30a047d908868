#include <benchmark/benchmark.h>

#include "qcompat/cloning.hpp"
#include "qcompat/compat.hpp"
#include "qcompat/constructions.hpp"
#include "qcompat/rng.hpp"

using namespace qcompat;

namespace {

ComplexMatrix random_hermitian(int d, Rng& rng) {
  ComplexMatrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.complex_gaussian();
  return hermitize(g);
}

PovmTuple mub_pair(int d, double noise) {
  PovmTuple t;
  t.dim = d;
  t.povms = {von_neumann_povm(ComplexMatrix::Identity(d, d)),
             von_neumann_povm(fourier_matrix(d))};
  return apply_noise(t, {noise, noise});
}

void BM_EigHermitian(benchmark::State& state) {
  Rng rng(1);
  const ComplexMatrix m = random_hermitian(static_cast<int>(state.range(0)), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eig_hermitian(m));
  }
}
BENCHMARK(BM_EigHermitian)->Arg(16)->Arg(64);

void BM_HaarIsometry(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(haar_isometry(32, 8, seed++));
  }
}
BENCHMARK(BM_HaarIsometry);

void BM_PairEffectValue(benchmark::State& state) {
  ComplexMatrix e = ComplexMatrix::Zero(3, 3);
  e(0, 0) = 1.0;
  e(1, 1) = 1.0;
  const ComplexMatrix f3 = fourier_matrix(3);
  const ComplexMatrix f = hermitize(f3.col(0) * f3.col(0).adjoint() +
                                    f3.col(1) * f3.col(1).adjoint());
  for (auto _ : state) {
    benchmark::DoNotOptimize(pair_effect_value(e, f));
  }
}
BENCHMARK(BM_PairEffectValue);

void BM_JointMeasurability(benchmark::State& state) {
  const PovmTuple t = mub_pair(static_cast<int>(state.range(0)), 0.6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(joint_measurability(t));
  }
}
BENCHMARK(BM_JointMeasurability)->Arg(2)->Arg(3)->Arg(4);

void BM_NoiseRobustness(benchmark::State& state) {
  const PovmTuple t = mub_pair(static_cast<int>(state.range(0)), 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(noise_robustness(t));
  }
}
BENCHMARK(BM_NoiseRobustness)->Arg(2)->Arg(3);

void BM_CloneChoi(benchmark::State& state) {
  const CloneParams p{2, 2, {0.5, 0.5}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(clone_choi_feasible(p));
  }
}
BENCHMARK(BM_CloneChoi);

}  // namespace

BENCHMARK_MAIN();
