#include <benchmark/benchmark.h>

#include <lipshare/hmm.hpp>
#include <lipshare/synthgen.hpp>

using namespace lipshare;

namespace {

DemoSet standardized_default(int steps, int demos) {
  SynthConfig cfg = default_config(1);
  cfg.steps_per_demo = steps;
  cfg.n_demos = demos;
  const DemoSet raw = generate(cfg);
  return apply_standardizer(raw, fit_standardizer(raw));
}

}  // namespace

static void BM_BaumWelchFit(benchmark::State& state) {
  const DemoSet ds = standardized_default(static_cast<int>(state.range(0)), 2);
  const auto seqs = emission_sequences(ds);
  FitConfig cfg;
  cfg.restarts = 1;
  cfg.max_iters = 20;
  for (auto _ : state) {
    auto fit = fit_baum_welch(seqs, 4, cfg);
    benchmark::DoNotOptimize(fit.model.A.data());
  }
}
BENCHMARK(BM_BaumWelchFit)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_Viterbi(benchmark::State& state) {
  const DemoSet ds = standardized_default(static_cast<int>(state.range(0)), 1);
  const auto seqs = emission_sequences(ds);
  FitConfig cfg;
  cfg.restarts = 1;
  cfg.max_iters = 10;
  const auto fit = fit_baum_welch(seqs, 4, cfg);
  for (auto _ : state) {
    auto path = viterbi(fit.model, seqs.front());
    benchmark::DoNotOptimize(path.states.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Viterbi)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_ForwardFilterStep(benchmark::State& state) {
  const DemoSet ds = standardized_default(2000, 1);
  const auto seqs = emission_sequences(ds);
  FitConfig cfg;
  cfg.restarts = 1;
  cfg.max_iters = 10;
  const auto fit = fit_baum_welch(seqs, 4, cfg);
  ForwardFilter filter(fit.model);
  Eigen::Index t = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(filter.step(seqs.front().row(t).transpose()));
    t = (t + 1) % seqs.front().rows();
    if (t == 0) filter.reset();
  }
}
BENCHMARK(BM_ForwardFilterStep);

BENCHMARK_MAIN();
