#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "oscq/harmonic_schrodingerization.hpp"
#include "oscq/nls_carleman.hpp"
#include "oscq/reference_integrator.hpp"
#include "oscq/td_embedding.hpp"

using namespace oscq;

namespace {

OscillatorSystem chain(Eigen::Index n) {
  Mat g = Mat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    g(j, j) = 1.0;
    if (j + 1 < n) g(j, j + 1) = g(j + 1, j) = 0.5;
  }
  Vec x0 = Vec::Zero(n);
  x0(0) = 1.0;
  return OscillatorSystem(Vec::Ones(n), g, x0, Vec::Zero(n));
}

NLSSystem nls_instance(Eigen::Index n) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> d(0.0, 1.0);
  CMat h1(n, n), h2(n, n * n);
  for (Eigen::Index i = 0; i < h1.size(); ++i) h1.data()[i] = cplx(d(rng), d(rng));
  for (Eigen::Index i = 0; i < h2.size(); ++i) h2.data()[i] = cplx(d(rng), d(rng));
  h1 = 0.5 * (h1 + h1.adjoint()).eval();
  h2 *= 0.1 / spectral_norm(h2);
  CVec psi = CVec::Ones(n) * (0.5 / std::sqrt(static_cast<double>(n)));
  return NLSSystem(h1, h2, psi);
}

}  // namespace

static void BM_HarmonicSimulation(benchmark::State& state) {
  const QuantumEncoding enc = encode(chain(state.range(0)));
  const auto grid = linspace(0.0, 10.0, 101);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_harmonic(enc, grid));
}
BENCHMARK(BM_HarmonicSimulation)->Arg(4)->Arg(16)->Arg(64);

static void BM_LinearIntegrator(benchmark::State& state) {
  const OscillatorSystem s = chain(state.range(0));
  const auto grid = linspace(0.0, 10.0, 101);
  for (auto _ : state) benchmark::DoNotOptimize(integrate_linear(s, grid));
}
BENCHMARK(BM_LinearIntegrator)->Arg(4)->Arg(16)->Arg(64);

static void BM_CarlemanBuild(benchmark::State& state) {
  const NLSSystem nls = nls_instance(2);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const CarlemanGenerator gen = build_carleman_generator(nls, k);
    benchmark::DoNotOptimize(build_symmetrized(gen, nls, 8.0));
  }
}
BENCHMARK(BM_CarlemanBuild)->DenseRange(2, 8, 2);

static void BM_SymmetrizedEvolution(benchmark::State& state) {
  const NLSSystem nls = nls_instance(2);
  const int k = static_cast<int>(state.range(0));
  const CarlemanGenerator gen = build_carleman_generator(nls, k);
  const SymmetrizedGenerator sym = build_symmetrized(gen, nls, 8.0);
  const auto grid = linspace(0.0, 1.0, 11);
  for (auto _ : state) benchmark::DoNotOptimize(evolve_and_decode(sym, gen, nls, grid));
}
BENCHMARK(BM_SymmetrizedEvolution)->DenseRange(2, 6, 2);

static void BM_MathieuEmbedding(benchmark::State& state) {
  const TimeDependentStiffnessSpec td(1, {{0, 0, 2.0, {{1.0, 1.0, 0.0}}}});
  const Vec m = Vec::Ones(1), x0 = Vec::Ones(1), v0 = Vec::Zero(1);
  const auto grid = linspace(0.0, 10.0, 101);
  for (auto _ : state) benchmark::DoNotOptimize(integrate_time_dependent(m, td, nullptr, x0, v0, grid));
}
BENCHMARK(BM_MathieuEmbedding);
BENCHMARK_MAIN();
