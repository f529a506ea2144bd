#include <benchmark/benchmark.h>

#include "losscap/mc.hpp"
#include "losscap/portfolio.hpp"
#include "losscap/rng.hpp"

using namespace losscap;

static void BM_StandardYear(benchmark::State& state) {
  auto data = generate_toy({ToyTag::ii, state.range(0), 1});
  auto years = terms_by_year(data.portfolio, data.events);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    Rng rng(3, StreamPurpose::standard_sim, rep++, 1);
    benchmark::DoNotOptimize(simulate_year_standard(years[0].terms, rng));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_StandardYear)->Arg(10000)->Arg(100000);

static void BM_BetaDraw(benchmark::State& state) {
  Rng rng(4, StreamPurpose::testing);
  for (auto _ : state) benchmark::DoNotOptimize(rng.beta(2.0, 18.0));
}
BENCHMARK(BM_BetaDraw);

BENCHMARK_MAIN();
