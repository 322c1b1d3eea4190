#include <benchmark/benchmark.h>

#include "rmdim/capacity.hpp"
#include "rmdim/cover_dim.hpp"
#include "rmdim/metric_dim.hpp"
#include "rmdim/random.hpp"

using namespace rmdim;

static void BM_DimCoverExact(benchmark::State& state) {
  Philox4x32 gen(stream_key(1, 0));
  const FinitePoset p = random_poset(static_cast<std::size_t>(state.range(0)), 0.3, gen);
  const Cover alpha = random_open_cover(p, 3, gen);
  for (auto _ : state) benchmark::DoNotOptimize(dim_cover_exact(p, alpha).value);
}
BENCHMARK(BM_DimCoverExact)->Arg(6)->Arg(10)->Arg(14);

static void BM_QnPoset(benchmark::State& state) {
  Philox4x32 gen(stream_key(2, 0));
  const auto env = BaseEnvironment::iid({"u", "v"}, {0.5, 0.5});
  const BundleSystem sys = random_poset_bundle(env, 8, 0.35, gen);
  const Cover alpha = random_open_cover(sys.poset(), 3, gen);
  const auto path = sample_paths(env, 1, 8, 3).front();
  for (auto _ : state) benchmark::DoNotOptimize(q_n(sys, path, alpha, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_QnPoset)->Arg(2)->Arg(4)->Arg(6);

static void BM_SepExact(benchmark::State& state) {
  Philox4x32 gen(stream_key(3, 0));
  const auto env = BaseEnvironment::point_mass();
  const BundleSystem sys = random_metric_bundle(env, static_cast<std::size_t>(state.range(0)), 2, gen);
  const auto path = sample_paths(env, 1, 3, 0).front();
  SolveOptions o;
  o.mode = SolveMode::Exact;
  for (auto _ : state) benchmark::DoNotOptimize(sep(sys, path, EpsProcess::constant(0.15), 3, o).value);
}
BENCHMARK(BM_SepExact)->Arg(16)->Arg(32)->Arg(64);

static void BM_CovExact(benchmark::State& state) {
  Philox4x32 gen(stream_key(4, 0));
  const auto env = BaseEnvironment::point_mass();
  const BundleSystem sys = random_metric_bundle(env, static_cast<std::size_t>(state.range(0)), 2, gen);
  const auto path = sample_paths(env, 1, 3, 0).front();
  SolveOptions o;
  o.mode = SolveMode::Exact;
  for (auto _ : state) benchmark::DoNotOptimize(cov(sys, path, EpsProcess::constant(0.15), 3, o).value);
}
BENCHMARK(BM_CovExact)->Arg(16)->Arg(32)->Arg(64);

static void BM_SepGreedyProductShift(benchmark::State& state) {
  std::vector<double> alphabet;
  const auto k = static_cast<std::size_t>(state.range(0));
  for (std::size_t i = 0; i <= k; ++i) alphabet.push_back(static_cast<double>(i) / static_cast<double>(k));
  const auto env = BaseEnvironment::point_mass();
  const BundleSystem sys = make_product_shift(env, alphabet, 1);
  const auto path = sample_paths(env, 1, 2, 0).front();
  SolveOptions o;
  o.mode = SolveMode::Greedy;
  for (auto _ : state) benchmark::DoNotOptimize(sep(sys, path, EpsProcess::constant(0.125), 2, o).value);
  state.counters["points"] = static_cast<double>(sys.carrier_size());
}
BENCHMARK(BM_SepGreedyProductShift)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_BirkhoffCount(benchmark::State& state) {
  const auto env = BaseEnvironment::point_mass();
  const BundleSystem sys = make_rotation_grid(env, 4096, {1237});
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto path = sample_paths(env, 1, n, 0).front();
  const Subset e(4096, {0, 1, 2, 3});
  for (auto _ : state) benchmark::DoNotOptimize(birkhoff_count(sys, path, e, n).b);
}
BENCHMARK(BM_BirkhoffCount)->Arg(64)->Arg(512);
BENCHMARK_MAIN();
