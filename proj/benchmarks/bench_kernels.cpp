#include <benchmark/benchmark.h>

#include "conelab/fourier.hpp"
#include "conelab/harness.hpp"
#include "conelab/maximal.hpp"
#include "conelab/operator_duality.hpp"
#include "conelab/tangency.hpp"

using namespace conelab;

namespace {

void BM_SigmaCheck(benchmark::State& state) {
  const auto quad = ConeQuadrature::for_scale(static_cast<double>(state.range(0)), 8.0);
  const SpacetimePoint x = off_cone_point(0.5 * quad.lambda, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(sigma_check(x, quad, false).value);
  state.counters["nodes"] = static_cast<double>(quad.size());
}
BENCHMARK(BM_SigmaCheck)->Arg(30)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_DecayMean(benchmark::State& state) {
  const int R = static_cast<int>(state.range(0));
  const CubeMeasure nu = generate(GenKind::RandomFrostman, R, resolve_param("auto", GenKind::RandomFrostman, R), 0);
  const auto quad = ConeQuadrature::for_scale(decay_scale(R), 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(decay_mean(nu, quad, false).value);
  state.counters["cubes"] = static_cast<double>(nu.mass());
}
BENCHMARK(BM_DecayMean)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_MaximalFunction(benchmark::State& state) {
  const double delta = 1.0 / static_cast<double>(state.range(0));
  const CircleConfig X = random_frostman_config(64, delta, 0);
  const PlaneGrid g = multiplicity_field(X, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(maximal_function(g, delta).value.data());
}
BENCHMARK(BM_MaximalFunction)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ClassifyPairs(benchmark::State& state) {
  const CircleConfig X = wolff_radii_config(static_cast<int>(state.range(0)), 1.0 / 256, 0);
  for (auto _ : state) benchmark::DoNotOptimize(classify_pairs(X, 0.01, false).size());
}
BENCHMARK(BM_ClassifyPairs)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_GreedyIncomparable(benchmark::State& state) {
  const CircleConfig X = wolff_radii_config(static_cast<int>(state.range(0)), 1.0 / 256, 0);
  const auto cands = candidate_rectangles(X, 1.0 / 16);
  for (auto _ : state) benchmark::DoNotOptimize(greedy_maximal_incomparable_indices(cands, 2.0).size());
  state.counters["candidates"] = static_cast<double>(cands.size());
}
BENCHMARK(BM_GreedyIncomparable)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_OperatorNorm(benchmark::State& state) {
  const int R = static_cast<int>(state.range(0));
  const CubeMeasure nu = generate(GenKind::LightTube, R, R, 0);
  const DiscreteExtensionOperator E(nu, ConeQuadrature::for_scale(decay_scale(R), 1.0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(operator_norm(E).lower);
  state.counters["rows"] = static_cast<double>(E.rows());
  state.counters["cols"] = static_cast<double>(E.cols());
}
BENCHMARK(BM_OperatorNorm)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
