// Serial reference vs OpenMP kernel for the three parallel hot spots.
// Arg(0) is the serial path, Arg(1) the parallel one.

#include "rosets/complexity.hpp"
#include "rosets/learners.hpp"
#include "rosets/synth.hpp"
#include "rosets/usets.hpp"
#include "rosets/validate.hpp"

#include <benchmark/benchmark.h>

#include <memory>

namespace {

rosets::Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? rosets::Execution::serial : rosets::Execution::parallel;
}

rosets::SynthSpec spec(int d) {
  rosets::SynthSpec s;
  s.d = d;
  s.true_coefficients = rosets::Vector::LinSpaced(d, 0.5, 1.5);
  s.noise_scale = 1.0;
  s.intercept = 2.0;
  s.seed = 11;
  s.append_constant = true;
  return s;
}

void BM_Rademacher(benchmark::State& state) {
  const rosets::Dataset data = rosets::generate(spec(5), 2000);
  for (auto _ : state) {
    auto est = rosets::empirical_rademacher_linear(data, 1.0, 512, 7, 8, exec_of(state));
    benchmark::DoNotOptimize(est.value);
  }
}
BENCHMARK(BM_Rademacher)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PinballExtremization(benchmark::State& state) {
  auto data = std::make_shared<const rosets::Dataset>(rosets::generate(spec(3), 400));
  const rosets::Loss loss = rosets::Loss::pinball(0.9);
  const rosets::LinearModel ref = rosets::fit_quantile(*data, 0.9, 10.0);
  const double t = rosets::empirical_loss(ref, *data, loss) + 0.02;
  const rosets::GoodModelSet gset(data, ref, loss, t);
  rosets::Rng rng = rosets::make_rng(3, 0);
  const rosets::QueryBatch q(rosets::draw_features(spec(3), 16, rng));
  for (auto _ : state) {
    auto box = rosets::build_method3(gset, q, {0.0, 0.0}, exec_of(state));
    benchmark::DoNotOptimize(box.max_gap);
  }
}
BENCHMARK(BM_PinballExtremization)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MonteCarloOuterTrials(benchmark::State& state) {
  rosets::PipelineConfig cfg;
  cfg.method = rosets::Method::m2;
  cfg.spec = spec(3);
  cfg.n = 1000;
  cfg.m = 3;
  cfg.min_return = 0.0;
  for (auto _ : state) {
    auto r = rosets::monte_carlo_feasibility(cfg, 16, 50, 5, exec_of(state));
    benchmark::DoNotOptimize(r.empirical);
  }
}
BENCHMARK(BM_MonteCarloOuterTrials)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
