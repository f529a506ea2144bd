#include <benchmark/benchmark.h>

#include <cmath>

#include "losscap/bounds.hpp"

using namespace losscap;

namespace {

SummandStats year_like_stats() {
  SummandStats s;
  s.n = 3220;
  s.vbar = 4.1e7;
  s.K = 1.7e7;
  s.K1 = 5.2e6;
  s.cstar = 2.4e5;
  return s;
}

}  // namespace

static void BM_LambertW(benchmark::State& state) {
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lambert_w0(x));
    x = x * 1.3 + 0.1;
    if (x > 1e6) x = 0.1;
  }
}
BENCHMARK(BM_LambertW);

static void BM_FK(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  double u = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f_k(u, k));
    u = u > 20.0 ? 0.01 : u * 1.5;
  }
}
BENCHMARK(BM_FK)->Arg(2)->Arg(4);

static void BM_LambdaStar(benchmark::State& state) {
  const SummandStats s = year_like_stats();
  double t = 0.05 * std::sqrt(s.vbar);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lambda_star_full(t, s));
    t = t > std::sqrt(s.vbar) ? 0.05 * std::sqrt(s.vbar) : t * 1.1;
  }
}
BENCHMARK(BM_LambdaStar);

static void BM_LogBound(benchmark::State& state) {
  const SummandStats s = year_like_stats();
  const BoundFamily family = static_cast<BoundFamily>(state.range(0));
  double t = 0.05 * std::sqrt(s.vbar);
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_bound(family, t, s));
    t = t > std::sqrt(s.vbar) ? 0.05 * std::sqrt(s.vbar) : t * 1.1;
  }
}
BENCHMARK(BM_LogBound)
    ->Arg(static_cast<int>(BoundFamily::bennett))
    ->Arg(static_cast<int>(BoundFamily::b1))
    ->Arg(static_cast<int>(BoundFamily::b2))
    ->Arg(static_cast<int>(BoundFamily::b3));
