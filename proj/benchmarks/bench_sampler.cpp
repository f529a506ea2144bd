#include <benchmark/benchmark.h>

#include "losscap/portfolio.hpp"
#include "losscap/rng.hpp"
#include "losscap/sampler.hpp"

using namespace losscap;

namespace {

const YearSummary& bench_summary() {
  static YearSummary summary = [] {
    auto data = generate_toy({ToyTag::ii, 20000, 1});
    auto years = terms_by_year(data.portfolio, data.events);
    return year_summary(1, years[0].terms);
  }();
  return summary;
}

}  // namespace

static void BM_DirectInversion(benchmark::State& state) {
  const auto& summary = bench_summary();
  auto dist = make_distribution(summary, Tail::upper, BoundFamily::b2);
  Rng rng(1, StreamPurpose::testing);
  for (auto _ : state) {
    benchmark::DoNotOptimize(invert_direct(dist, rng.uniform_pos()));
  }
}
BENCHMARK(BM_DirectInversion);

static void BM_SirPerSample(benchmark::State& state) {
  // one full SIR cycle per iteration batch: propose, weight, resample
  const auto& summary = bench_summary();
  const std::size_t m = static_cast<std::size_t>(state.range(0));
  std::uint64_t round = 0;
  for (auto _ : state) {
    Rng prop(2, StreamPurpose::sir_proposal, round);
    auto sample = bernstein_propose(summary, Tail::upper, m, prop);
    compute_importance_weights(sample, summary);
    Rng res(2, StreamPurpose::sir_resample, round);
    benchmark::DoNotOptimize(residual_resample(sample, res));
    ++round;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(m));
}
BENCHMARK(BM_SirPerSample)->Arg(100)->Arg(1000);
