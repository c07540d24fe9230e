#include <benchmark/benchmark.h>

#include <lipshare/lipschitz.hpp>
#include <lipshare/synthgen.hpp>

#include <random>

using namespace lipshare;

namespace {

SampleSet make_set(Eigen::Index n, Eigen::Index d, Eigen::Index l) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SampleSet ss;
  ss.obs.resize(n, d);
  ss.act.resize(n, l);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < d; ++c) ss.obs(i, c) = gauss(rng);
    for (Eigen::Index c = 0; c < l; ++c) ss.act(i, c) = gauss(rng);
  }
  ss.W = 1;
  ss.d_raw = static_cast<int>(d);
  ss.demo_index.assign(static_cast<std::size_t>(n), 0);
  ss.t_index.assign(static_cast<std::size_t>(n), 0);
  return ss;
}

}  // namespace

static void BM_PointwiseQuotients(benchmark::State& state) {
  const auto n = state.range(0);
  const auto ss = make_set(n, 100, 6);
  QuotientOptions opts;
  opts.threads = static_cast<int>(state.range(1));
  for (auto _ : state) {
    auto report = pointwise_quotients(ss, opts);
    benchmark::DoNotOptimize(report.entries.data());
  }
  state.SetItemsProcessed(state.iterations() * n * (n - 1));
}
BENCHMARK(BM_PointwiseQuotients)
    ->Args({500, 1})
    ->Args({2000, 1})
    ->Args({2000, 0})
    ->Args({5000, 0})
    ->Unit(benchmark::kMillisecond);

static void BM_ModeQuotients(benchmark::State& state) {
  const auto n = state.range(0);
  const auto ss = make_set(n, 100, 6);
  std::mt19937_64 rng(7);
  ModeAssignment modes;
  for (Eigen::Index i = 0; i < n; ++i) modes.states.push_back(int(rng() % 4));
  QuotientOptions opts;
  for (auto _ : state) {
    auto reports = mode_quotients(ss, modes, opts);
    benchmark::DoNotOptimize(reports.data());
  }
}
BENCHMARK(BM_ModeQuotients)->Arg(2000)->Arg(5000)->Unit(benchmark::kMillisecond);

static void BM_Histogram(benchmark::State& state) {
  const auto ss = make_set(2000, 20, 4);
  const auto report = pointwise_quotients(ss);
  for (auto _ : state) {
    auto h = quotient_histogram(report, 64);
    benchmark::DoNotOptimize(h.counts.data());
  }
}
BENCHMARK(BM_Histogram);

BENCHMARK_MAIN();
