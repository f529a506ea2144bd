#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "losscap/errors.hpp"
#include "losscap/sampler.hpp"
#include "oracles.hpp"

using namespace losscap;

namespace {

YearSummary fixture_summary(std::uint64_t seed = 21) {
  auto data = fixtures::make_portfolio({.n_risks = 60, .n_years = 1, .seed = seed});
  auto years = terms_by_year(data.portfolio, data.events);
  return year_summary(1, years[0].terms);
}

}  // namespace

TEST_SUITE_BEGIN("sampler");

TEST_CASE("survival_g boundary and shape") {
  auto summary = fixture_summary();
  auto upper = make_distribution(summary, Tail::upper, BoundFamily::b2);
  auto lower = make_distribution(summary, Tail::lower, BoundFamily::b2);

  CHECK(survival_g(upper, summary.expected_total) == 1.0);
  CHECK(survival_g(lower, summary.expected_total) == 1.0);
  CHECK(survival_g(upper, summary.expected_total - 1.0) == 1.0);

  double prev = 1.0;
  const double scale = std::sqrt(summary.n * summary.upper.vbar);
  for (int i = 1; i <= 50; ++i) {
    const double v = survival_g(upper, summary.expected_total + 0.2 * i * scale);
    CHECK(v <= prev + 1e-15);
    CHECK(v >= 0.0);
    prev = v;
  }

  auto bern = make_distribution(summary, Tail::upper, BoundFamily::bernstein);
  for (double tp : {0.5 * scale, 2.0 * scale, 5.0 * scale}) {
    CHECK(survival_g(bern, summary.expected_total + tp) ==
          doctest::Approx(bernstein_survival(tp, summary.upper)).epsilon(1e-12));
  }
}

TEST_CASE("invert_direct round trip and monotonicity") {
  auto summary = fixture_summary();
  for (BoundFamily family :
       {BoundFamily::bennett, BoundFamily::b1, BoundFamily::b2, BoundFamily::b3}) {
    auto dist = make_distribution(summary, Tail::upper, family);
    for (double u : {0.5, 0.9, 0.999}) {
      const double s = invert_direct(dist, u);
      CHECK(s >= summary.expected_total);
      CHECK(survival_g(dist, s) == doctest::Approx(1.0 - u).epsilon(1e-8));
    }
    CHECK(invert_direct(dist, 1.0 - 1e-9) > invert_direct(dist, 0.999));
  }
  auto dist = make_distribution(summary, Tail::upper, BoundFamily::b2);
  CHECK_THROWS_AS(invert_direct(dist, 0.0), ValidationError);
  CHECK_THROWS_AS(invert_direct(dist, 1.0), ValidationError);
  // u -> 0 collapses to the mean boundary
  CHECK(invert_direct(dist, 1e-300) == doctest::Approx(summary.expected_total));

  auto low = make_distribution(summary, Tail::lower, BoundFamily::b2);
  for (double u : {0.3, 0.7}) {
    const double s = invert_direct(low, u);
    CHECK(s <= summary.expected_total);
    CHECK(survival_g(low, s) == doctest::Approx(u).epsilon(1e-8));
  }
}

TEST_CASE("bernstein inversion closed form") {
  SummandStats s;
  s.n = 1;
  s.vbar = 1.0;
  s.cstar = 3.0;
  s.K = 0.5;
  s.K1 = 0.1;
  CHECK(bernstein_invert_exceedance(1.0, s) == 0.0);
  // survival e^-1, n vbar = 1, c* = 3: t' = sqrt(3) + 1
  CHECK(bernstein_invert_exceedance(std::exp(-1.0), s) ==
        doctest::Approx(std::sqrt(3.0) + 1.0).epsilon(1e-12));

  // matches the bisection inversion of the Bernstein family
  auto summary = fixture_summary();
  auto dist = make_distribution(summary, Tail::upper, BoundFamily::bernstein);
  for (double u : {0.2, 0.8, 0.99}) {
    const double via_bisection = invert_direct(dist, u) - summary.expected_total;
    const double closed = bernstein_invert_exceedance(1.0 - u, summary.upper);
    CHECK(via_bisection == doctest::Approx(closed).epsilon(1e-9));
  }
}

TEST_CASE("coupled samples sandwich the mean") {
  auto summary = fixture_summary();
  Rng rng(3, StreamPurpose::testing);
  for (int i = 0; i < 2000; ++i) {
    const double u = rng.uniform_pos();
    auto [lo, hi] = coupled_sample(summary, BoundFamily::b2, u);
    CHECK(lo <= summary.expected_total + 1e-9);
    CHECK(hi >= summary.expected_total - 1e-9);
    CHECK(lo <= hi);
  }
  auto [lo5, hi5] = coupled_sample(summary, BoundFamily::b2, 0.5);
  CHECK(lo5 <= summary.expected_total);
  CHECK(hi5 >= summary.expected_total);
  auto [lo9, hi9] = coupled_sample(summary, BoundFamily::b2, 0.9);
  auto [lo99, hi99] = coupled_sample(summary, BoundFamily::b2, 0.999);
  // both draws are nondecreasing in u and the bracket widens
  CHECK(hi99 - lo99 > hi9 - lo9);
  CHECK(hi99 > hi9);
  CHECK(lo99 >= lo9);
  auto [lo1, hi1] = coupled_sample(summary, BoundFamily::b2, 0.1);
  CHECK(lo1 <= lo9);
  CHECK(hi1 <= hi9);
}

TEST_CASE("bernstein proposal sample matches its survival function") {
  auto summary = fixture_summary();
  Rng rng(17, StreamPurpose::testing);
  const std::size_t m = 1000000;
  auto sample = bernstein_propose(summary, Tail::upper, m, rng);
  std::vector<double> exc = sample.exceedances;
  std::sort(exc.begin(), exc.end());
  const double scale = std::sqrt(summary.n * summary.upper.vbar);
  for (int i = 1; i <= 10; ++i) {
    const double tp = 0.5 * i * scale;
    const auto it = std::lower_bound(exc.begin(), exc.end(), tp);
    const double phat = static_cast<double>(exc.end() - it) / static_cast<double>(m);
    const double expect = bernstein_survival(tp, summary.upper);
    CHECK(oracles::wilson_lower(phat, static_cast<double>(m), 4.5) <= expect);
    CHECK(oracles::wilson_upper(phat, static_cast<double>(m), 4.5) >= expect);
  }
  for (double pos : sample.positions) CHECK(pos >= summary.expected_total);
}

TEST_CASE("f_BS density sign and value verified by finite differences") {
  // the density of the B2-implied exceedance distribution must be the
  // negated derivative of its survival function, and nonnegative
  auto summary = fixture_summary();
  const SummandStats& stats = summary.upper;
  const double scale = std::sqrt(summary.n * stats.vbar);
  for (double tp : {0.2 * scale, scale, 3.0 * scale, 8.0 * scale}) {
    const double hstep = 1e-5 * scale;
    const double s_plus = std::exp(bound_sample_log_survival(tp + hstep, stats));
    const double s_minus = std::exp(bound_sample_log_survival(tp - hstep, stats));
    const double fd = -(s_plus - s_minus) / (2.0 * hstep);
    REQUIRE(fd > 0.0);
    const double density = std::exp(bound_sample_log_density(tp, stats));
    CHECK(density > 0.0);
    CHECK(density == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("importance weights are finite, positive and continuous") {
  auto summary = fixture_summary();
  Rng rng(23, StreamPurpose::testing);
  auto sample = bernstein_propose(summary, Tail::upper, 10000, rng);
  compute_importance_weights(sample, summary);
  double wsum = 0;
  for (double w : sample.raw_weights) {
    CHECK(std::isfinite(w));
    CHECK(w >= 0.0);
  }
  for (double w : sample.weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sample.ess > 0.2 * 10000);

  // continuity of w*(t') on a grid
  const SummandStats& stats = summary.upper;
  const double scale = std::sqrt(summary.n * stats.vbar);
  auto weight_at = [&](double tp) {
    return std::exp(bound_sample_log_density(tp, stats) -
                    bernstein_proposal_log_density(tp, stats));
  };
  for (int i = 1; i < 60; ++i) {
    const double tp = 0.1 * i * scale;
    const double w0 = weight_at(tp);
    const double w1 = weight_at(tp * (1.0 + 1e-6));
    CHECK(std::isfinite(w0));
    CHECK(std::abs(w1 / w0 - 1.0) < 1e-4);
  }

  // target equal to proposal gives constant unit weights
  for (int i = 1; i < 10; ++i) {
    const double tp = 0.3 * i * scale;
    CHECK(std::exp(bernstein_proposal_log_density(tp, stats) -
                   bernstein_proposal_log_density(tp, stats)) == 1.0);
  }
}

TEST_CASE("weighted proposal reproduces the B2 survival bound") {
  auto data = generate_toy({ToyTag::ii, 20000, 3});
  auto years = terms_by_year(data.portfolio, data.events);
  auto summary = year_summary(1, years[0].terms);
  Rng rng(29, StreamPurpose::testing);
  const std::size_t m = 100000;
  auto sample = bernstein_propose(summary, Tail::upper, m, rng);
  compute_importance_weights(sample, summary);

  // self-normalized estimate of P(t' >= tp) against exp(n B2(tp/n))
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sample.exceedances[a] < sample.exceedances[b];
  });
  const double scale = std::sqrt(summary.n * summary.upper.vbar);
  for (int g = 1; g <= 8; ++g) {
    const double tp = 0.5 * g * scale;
    double mass = 0;
    for (std::size_t i : order)
      if (sample.exceedances[i] >= tp) mass += sample.weights[i];
    const double expect = std::exp(bound_sample_log_survival(tp, summary.upper));
    // weighted estimate: compare with generous Wilson-style slack at ess
    const double slack = 4.5 * std::sqrt(expect * (1.0 - expect) / sample.ess) + 2e-4;
    CHECK(std::abs(mass - expect) < slack);
  }
}

TEST_CASE("residual resampling") {
  WeightedSample ws;
  ws.positions = {1, 2, 3, 4};
  ws.weights = {0.25, 0.25, 0.25, 0.25};
  Rng rng(31, StreamPurpose::testing);
  auto out = residual_resample(ws, rng);
  std::sort(out.begin(), out.end());
  CHECK(out == std::vector<double>{1, 2, 3, 4});

  ws.positions = {5, 6, 7};
  ws.weights = {0.0, 1.0, 0.0};
  out = residual_resample(ws, rng);
  CHECK(out == std::vector<double>{6, 6, 6});

  // copy-count expectation against the multinomial oracle: the output size
  // equals the input size, so use 97 slots where only five carry weight
  const std::vector<double> w{0.5, 0.2, 0.15, 0.1, 0.05};
  const std::size_t m = 97;
  WeightedSample big;
  big.positions.resize(m);
  big.weights.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) big.positions[i] = -1.0;
  for (std::size_t i = 0; i < 5; ++i) {
    big.positions[i] = static_cast<double>(i);
    big.weights[i] = w[i];
  }
  const int reps = 10000;
  std::vector<double> counts(5, 0.0);
  for (int r = 0; r < reps; ++r) {
    Rng rr(32, StreamPurpose::testing, static_cast<std::uint64_t>(r));
    auto sampled = residual_resample(big, rr);
    REQUIRE(sampled.size() == m);
    for (double v : sampled) {
      REQUIRE(v >= 0.0);  // zero-weight slots never selected
      counts[static_cast<std::size_t>(v)] += 1.0;
    }
  }
  for (std::size_t i = 0; i < 5; ++i) {
    const double expect = static_cast<double>(m) * w[i];
    const double resid = expect - std::floor(expect + 1e-9);
    // per-rep variance is at most the multinomial resid(1-resid); 3 sigma
    const double sd = std::sqrt(std::max(resid * (1.0 - resid), 1e-12) / reps);
    CHECK(std::abs(counts[i] / reps - expect) < std::max(3.0 * sd, 1e-6));
  }
}

TEST_CASE("degenerate years collapse to the mean") {
  // p = 1 with damage ratio pinned at 1 leaves no randomness: the centred
  // summand has zero variance and zero upper support
  LossTerm certain{1.0, 1e10, 1e-10, 50.0, 3};
  auto summary = year_summary(4, std::vector<LossTerm>{certain});
  CHECK(summary.degenerate());
  CHECK(summary.expected_total == doctest::Approx(150.0).epsilon(1e-12));

  auto dist = make_distribution(summary, Tail::upper, BoundFamily::b2);
  CHECK(survival_g(dist, 149.0) == 1.0);
  CHECK(survival_g(dist, 151.0) == 0.0);
  CHECK(invert_direct(dist, 0.37) == summary.expected_total);

  std::vector<YearSummary> summaries{summary};
  auto direct = run_conservative(summaries, 5, BoundFamily::b2, SamplePath::direct, 1, 1);
  auto sir = run_conservative(summaries, 500, BoundFamily::b2, SamplePath::sir, 1, 1);
  for (double v : direct.lower.values) CHECK(v == summary.expected_total);
  for (double v : direct.upper.values) CHECK(v == summary.expected_total);
  for (double v : sir.lower.values) CHECK(v == summary.expected_total);
  for (double v : sir.upper.values) CHECK(v == summary.expected_total);

  // an empty year behaves the same way with a zero mean
  auto empty = year_summary(5, std::vector<LossTerm>{});
  CHECK(empty.degenerate());
  CHECK(empty.expected_total == 0.0);
  auto edist = make_distribution(empty, Tail::lower, BoundFamily::b2);
  CHECK(invert_direct(edist, 0.9) == 0.0);
}

TEST_CASE("run_conservative direct path: cell-wise sandwich and determinism") {
  auto data = fixtures::make_portfolio({.n_risks = 40, .n_years = 3, .seed = 41});
  auto years = terms_by_year(data.portfolio, data.events);
  auto summaries = summarize_years(years);
  auto run1 = run_conservative(summaries, 2, BoundFamily::b2, SamplePath::direct, 9, 1);
  auto run2 = run_conservative(summaries, 2, BoundFamily::b2, SamplePath::direct, 9, 2);
  CHECK(run1.lower.values == run2.lower.values);
  CHECK(run1.upper.values == run2.upper.values);
  for (std::size_t i = 0; i < run1.lower.values.size(); ++i)
    CHECK(run1.lower.values[i] <= run1.upper.values[i]);
  CHECK(run1.lower.method == SimMethod::direct_fminus);
  CHECK(run1.upper.method == SimMethod::direct_fplus);
}

TEST_CASE("run_conservative SIR path: determinism, ESS, tags") {
  auto data = fixtures::make_portfolio({.n_risks = 40, .n_years = 3, .seed = 43});
  auto years = terms_by_year(data.portfolio, data.events);
  auto summaries = summarize_years(years);
  auto run1 = run_conservative(summaries, 500, BoundFamily::b2, SamplePath::sir, 9, 1);
  auto run2 = run_conservative(summaries, 500, BoundFamily::b2, SamplePath::sir, 9, 2);
  CHECK(run1.lower.values == run2.lower.values);
  CHECK(run1.upper.values == run2.upper.values);
  CHECK(run1.min_ess_fraction > 0.2);
  CHECK(run1.lower.method == SimMethod::sir_fminus);
  for (std::size_t i = 0; i < run1.lower.values.size(); ++i)
    CHECK(run1.lower.values[i] <= run1.upper.values[i]);

  CHECK_THROWS_AS(
      run_conservative(summaries, 10, BoundFamily::b1, SamplePath::sir, 9, 1),
      ConfigError);
  CHECK_THROWS_AS(
      run_conservative(summaries, 10, BoundFamily::hoeffding, SamplePath::direct, 9, 1),
      ConfigError);
}

TEST_CASE("SIR closely matches direct inversion (small version)") {
  auto summary = fixture_summary(47);
  std::vector<YearSummary> summaries{summary};
  const std::size_t m = 4000;
  auto sir = run_conservative(summaries, m, BoundFamily::b2, SamplePath::sir, 7, 1);
  auto direct = run_conservative(summaries, m, BoundFamily::b2, SamplePath::direct, 8, 1);
  std::vector<double> a(m), b(m);
  for (std::size_t i = 0; i < m; ++i) {
    a[i] = sir.upper.at(i, 0);
    b[i] = direct.upper.at(i, 0);
  }
  CHECK(oracles::ks_two_sample(a, b) < 0.05);
}

TEST_CASE("table-accelerated SIR weights match the exact density ratio") {
  // the fast path must agree with the exact weights over the mass-carrying
  // range; compare resampled output distributions at matched seeds
  auto summary = fixture_summary(53);
  const SummandStats& stats = summary.upper;
  // exact and table-backed runs of the same year
  std::vector<YearSummary> summaries{summary};
  auto fast = run_conservative(summaries, 5000, BoundFamily::b2, SamplePath::sir, 77, 1);
  Rng prop(78, StreamPurpose::testing);
  auto exact_sample = bernstein_propose(summary, Tail::upper, 5000, prop);
  compute_importance_weights(exact_sample, summary);
  Rng rs(79, StreamPurpose::testing);
  auto exact_values = residual_resample(exact_sample, rs);
  std::vector<double> fast_col(5000);
  for (std::size_t i = 0; i < 5000; ++i) fast_col[i] = fast.upper.at(i, 0);
  CHECK(oracles::ks_two_sample(fast_col, exact_values) < 0.04);
  CHECK(fast.min_ess_fraction > 0.2);
  (void)stats;
}

TEST_CASE("SIR wall time envelopes" * doctest::timeout(120)) {
  // grows sublinearly in M: time(M=1000) < 5 x time(M=100)
  auto data = generate_toy({ToyTag::ii, 30000, 9});
  auto years = terms_by_year(data.portfolio, data.events);
  auto one = year_summary(1, years[0].terms, 0);
  std::vector<YearSummary> summaries(200, one);
  for (int y = 0; y < 200; ++y) summaries[y].year = y + 1;
  auto best_of = [&](std::size_t m) {
    double best = 1e100;
    for (int rep = 0; rep < 5; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      run_conservative(summaries, m, BoundFamily::b2, SamplePath::sir, 7, 2);
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };
  const double t100 = best_of(100);
  const double t1000 = best_of(1000);
  CHECK(t1000 < 5.0 * t100);

  // does not scale with portfolio size: same years, 10x the rows behind the
  // summaries; sampling times within 1.5x of each other
  auto small = fixtures::make_portfolio({.n_risks = 300, .n_years = 50, .seed = 59});
  auto big = bootstrap_scale(small.portfolio, small.events, 10, 5);
  auto sum_small = summarize_years(terms_by_year(small.portfolio, small.events, 50), 0, 2);
  auto sum_big = summarize_years(terms_by_year(big.portfolio, big.events, 50), 0, 2);
  auto time_of = [&](const std::vector<YearSummary>& s) {
    double best = 1e100;
    for (int rep = 0; rep < 5; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      run_conservative(s, 2000, BoundFamily::b2, SamplePath::sir, 7, 2);
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };
  const double t_small = time_of(sum_small);
  const double t_big = time_of(sum_big);
  CHECK(t_big <= 1.5 * t_small);
}

TEST_CASE("F+ samples stochastically dominate the standard method") {
  auto data = fixtures::make_portfolio({.n_risks = 50, .n_years = 1, .seed = 51});
  auto years = terms_by_year(data.portfolio, data.events);
  auto summaries = summarize_years(years);
  const std::size_t m = 5000;
  auto cons = run_conservative(summaries, m, BoundFamily::b2, SamplePath::direct, 3, 2);
  auto base = run_standard(years, m, 4, 2);
  std::vector<double> fplus(m), std_totals(m), fminus(m);
  for (std::size_t i = 0; i < m; ++i) {
    fplus[i] = cons.upper.at(i, 0);
    fminus[i] = cons.lower.at(i, 0);
    std_totals[i] = base.at(i, 0);
  }
  std::sort(fplus.begin(), fplus.end());
  std::sort(fminus.begin(), fminus.end());
  std::sort(std_totals.begin(), std_totals.end());
  // one-sided: ECDF of F+ at or below the standard ECDF, and F- at or above
  const double slack = 1.86 * std::sqrt(2.0 / static_cast<double>(m));
  double worst_plus = 0, worst_minus = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = std_totals[i];
    const double ecdf_std = static_cast<double>(i + 1) / static_cast<double>(m);
    const auto up = std::upper_bound(fplus.begin(), fplus.end(), x);
    const double ecdf_plus = static_cast<double>(up - fplus.begin()) / static_cast<double>(m);
    worst_plus = std::max(worst_plus, ecdf_plus - ecdf_std);
    const auto lo = std::upper_bound(fminus.begin(), fminus.end(), x);
    const double ecdf_minus = static_cast<double>(lo - fminus.begin()) / static_cast<double>(m);
    worst_minus = std::max(worst_minus, ecdf_std - ecdf_minus);
  }
  CHECK(worst_plus <= slack);
  CHECK(worst_minus <= slack);
}

TEST_SUITE_END();
