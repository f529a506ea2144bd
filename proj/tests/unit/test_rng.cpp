#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "losscap/rng.hpp"
#include "oracles.hpp"

using namespace losscap;

TEST_SUITE_BEGIN("rng");

TEST_CASE("philox4x64-10 known-answer vectors") {
  // reference outputs of the Philox4x64-10 bijection
  {
    auto out = philox4x64({0, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x16554d9eca36314cULL);
    CHECK(out[1] == 0xdb20fe9d672d0fdcULL);
    CHECK(out[2] == 0xd7e772cee186176bULL);
    CHECK(out[3] == 0x7e68b68aec7ba23bULL);
  }
  {
    auto out = philox4x64({0x0123456789abcdefULL, 0xfedcba9876543210ULL, 0x0f1e2d3c4b5a6978ULL,
                           0x8796a5b4c3d2e1f0ULL},
                          {0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL});
    CHECK(out[0] == 0xb6caba8789597d22ULL);
    CHECK(out[1] == 0x071c5f6026f1998aULL);
    CHECK(out[2] == 0x994667aa6c3b09c3ULL);
    CHECK(out[3] == 0xeb3c90a53a79abc4ULL);
  }
  {
    const std::uint64_t ff = ~0ULL;
    auto out = philox4x64({ff, ff, ff, ff}, {ff, ff});
    CHECK(out[0] == 0x87b092c3013fe90bULL);
    CHECK(out[1] == 0x438c3c67be8d0224ULL);
    CHECK(out[2] == 0x9cc7d7c69cd777b6ULL);
    CHECK(out[3] == 0xa09caebf594f0ba0ULL);
  }
}

TEST_CASE("streams are reproducible and label-disjoint") {
  Rng a(42, StreamPurpose::testing, 7, 9);
  Rng b(42, StreamPurpose::testing, 7, 9);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c(42, StreamPurpose::testing, 7, 10);
  Rng d(43, StreamPurpose::testing, 7, 9);
  Rng e(42, StreamPurpose::testing, 7, 9);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 8; ++i) {
    const auto ref = e.next_u64();
    differs_c |= c.next_u64() != ref;
    differs_d |= d.next_u64() != ref;
  }
  CHECK(differs_c);
  CHECK(differs_d);
}

TEST_CASE("uniform ranges") {
  Rng rng(1, StreamPurpose::testing);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.uniform_pos();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("no autocorrelation across a substream grid") {
  // first uniform of each (m, y) substream on a 100 x 100 grid; adjacent
  // cells must be uncorrelated
  const int side = 100;
  std::vector<double> grid(side * side);
  for (int m = 0; m < side; ++m)
    for (int y = 0; y < side; ++y) {
      Rng rng(99, StreamPurpose::standard_sim, static_cast<std::uint64_t>(m),
              static_cast<std::uint64_t>(y));
      grid[m * side + y] = rng.uniform();
    }
  auto corr = [&](int lag) {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    int n = 0;
    for (int i = 0; i + lag < side * side; ++i) {
      const double x = grid[i], y = grid[i + lag];
      sx += x;
      sy += y;
      sxx += x * x;
      syy += y * y;
      sxy += x * y;
      ++n;
    }
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double vx = sxx / n - (sx / n) * (sx / n);
    const double vy = syy / n - (sy / n) * (sy / n);
    return cov / std::sqrt(vx * vy);
  };
  // 4 sigma at n = 1e4 is 0.04
  CHECK(std::abs(corr(1)) < 0.04);
  CHECK(std::abs(corr(side)) < 0.04);
}

TEST_CASE("distribution moments") {
  Rng rng(5, StreamPurpose::testing);
  const int n = 200000;
  std::vector<double> normals(n), betas(n), gammas(n);
  for (int i = 0; i < n; ++i) {
    normals[i] = rng.normal();
    betas[i] = rng.beta(2.0, 3.0);
    gammas[i] = rng.gamma(0.7);
  }
  const double se = 4.0 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(oracles::mean(normals)) < se);
  CHECK(std::abs(oracles::sample_variance(normals) - 1.0) < 4.0 * se);
  // Beta(2,3): mean 0.4, var 0.04
  CHECK(std::abs(oracles::mean(betas) - 0.4) < 0.2 * se);
  CHECK(std::abs(oracles::sample_variance(betas) - 0.04) < 0.1 * se);
  // Gamma(0.7): mean 0.7, var 0.7
  CHECK(std::abs(oracles::mean(gammas) - 0.7) < se);
  CHECK(std::abs(oracles::sample_variance(gammas) - 0.7) < 4.0 * se);
}

TEST_SUITE_END();
