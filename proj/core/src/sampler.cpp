#include "losscap/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "losscap/errors.hpp"
#include "losscap/parallel.hpp"

namespace losscap {

namespace {

const SummandStats& tail_stats(const YearSummary& summary, Tail tail) {
  return tail == Tail::upper ? summary.upper : summary.lower;
}

// Per-year table of exact log-weights on a uniform grid in sqrt(-log u).
// Building it costs k_weight_knots exact evaluations; each draw then costs a
// cubic interpolation instead of a Lambert W solve, which is what lets the
// SIR path grow sublinearly in M. The sqrt coordinate absorbs the square-root
// behaviour of t'(-log u) near u = 1, and uniform_pos() keeps -log u within
// [0, 54 log 2], so the grid covers every reachable draw. Interpolation error
// stays below ~6e-4 in log weight over the mass-carrying range.
constexpr int k_weight_knots = 64;

class WeightTable {
 public:
  WeightTable(const SummandStats& stats, std::int32_t year) {
    const double s_max = 54.0 * 0.6931471805599453;  // -log of the smallest u
    step_ = std::sqrt(s_max) / (k_weight_knots - 1);
    knots_[0] = 0.0;  // w -> 1 as t' -> 0
    for (int j = 1; j < k_weight_knots; ++j) {
      const double q = j * step_;
      const double tprime = bernstein_invert_exceedance(std::exp(-q * q), stats);
      const double logw = bound_sample_log_density(tprime, stats) -
                          bernstein_proposal_log_density(tprime, stats);
      if (!std::isfinite(logw))
        throw NumericError("importance weight not finite for year " + std::to_string(year) +
                           " at t' = " + std::to_string(tprime));
      knots_[j] = logw;
    }
  }

  double log_weight(double neg_log_u) const {
    const double x = std::sqrt(neg_log_u) / step_;
    int i = static_cast<int>(x);
    if (i >= k_weight_knots - 1) return knots_[k_weight_knots - 1];
    const double f = x - i;
    const double p0 = knots_[i == 0 ? 0 : i - 1];
    const double p1 = knots_[i];
    const double p2 = knots_[i + 1];
    const double p3 = knots_[i + 2 < k_weight_knots ? i + 2 : k_weight_knots - 1];
    return p1 + 0.5 * f *
                    (p2 - p0 +
                     f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)));
  }

 private:
  double step_;
  double knots_[k_weight_knots];
};

double position_of(double expected_total, Tail tail, double tprime) {
  return tail == Tail::upper ? expected_total + tprime : expected_total - tprime;
}

// Fast SIR column for one (year, tail): proposals are generated already
// ordered via exponential spacings (the order statistics of M uniforms),
// weights come from the per-year table, and residual resampling emits the
// column by walking the sorted positions with their copy counts. No
// comparison sort anywhere, so the per-draw cost stays a handful of
// transcendentals. Returns ESS/M. emit(i, value) receives ascending values.
template <typename Emit>
double sir_column_with_table(const YearSummary& summary, Tail tail, std::size_t m,
                             Rng& proposal_rng, Rng& resample_rng, Emit&& emit) {
  const SummandStats& stats = tail_stats(summary, tail);
  const WeightTable table(stats, summary.year);
  const double third_cstar = stats.cstar / 3.0;
  const double two_nv = 2.0 * stats.n * stats.vbar;

  // cumulative exponential spacings: cum[i]/cum[m] are ascending uniforms
  std::vector<double> cum(m + 1);
  double acc = 0.0;
  for (std::size_t i = 0; i <= m; ++i) {
    acc += proposal_rng.exponential();
    cum[i] = acc;
  }
  const double log_total = std::log(cum[m]);

  // ascending u means descending t'; store in ascending-position order
  std::vector<double> positions(m), weights(m);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double neg_log_u = log_total - std::log(cum[i]);  // u_(i) ascending
    const double a = third_cstar * neg_log_u;
    const double tprime = std::sqrt(a * a + two_nv * neg_log_u) + a;
    const double w = std::exp(table.log_weight(neg_log_u));
    if (!std::isfinite(w))
      throw NumericError("importance weight not finite for year " +
                         std::to_string(summary.year) + " at t' = " + std::to_string(tprime));
    const std::size_t slot = tail == Tail::upper ? m - 1 - i : i;
    positions[slot] = position_of(summary.expected_total, tail, tprime);
    weights[slot] = w;
    sum += w;
    sum_sq += w * w;
  }

  // residual resampling on the normalized weights, tracked as copy counts
  std::vector<std::uint32_t> counts(m);
  std::vector<double> residual_cum(m);
  const double dm = static_cast<double>(m);
  double residual_acc = 0.0;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double scaled = dm * weights[i] / sum;
    const double copies = std::floor(scaled + 1e-9);
    counts[i] = static_cast<std::uint32_t>(copies);
    assigned += counts[i];
    residual_acc += std::max(0.0, scaled - copies);
    residual_cum[i] = residual_acc;
  }
  for (std::size_t d = assigned; d < m; ++d) {
    const double target = resample_rng.uniform() * residual_acc;
    const auto it = std::lower_bound(residual_cum.begin(), residual_cum.end(), target);
    const std::size_t idx =
        std::min<std::size_t>(static_cast<std::size_t>(it - residual_cum.begin()), m - 1);
    ++counts[idx];
  }

  std::size_t out = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::uint32_t c = 0; c < counts[i]; ++c) emit(out++, positions[i]);
  return (sum * sum / sum_sq) / dm;
}

// Solves n*log_bound(t'/n) = log_target for t' >= 0 (log_target < 0).
double invert_exceedance(BoundFamily family, const SummandStats& stats, double log_target) {
  if (log_target >= 0.0) return 0.0;
  const double n = stats.n;
  auto log_survival = [&](double tp) { return n * log_bound(family, tp / n, stats); };

  double hi = std::sqrt(n * stats.vbar);
  if (!(hi > 0.0)) hi = 1.0;
  double lo = 0.0;
  int doublings = 0;
  while (log_survival(hi) > log_target) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 200)
      throw NumericError("invert_direct: bracketing failed (target " +
                         std::to_string(log_target) + ")");
  }
  for (int it = 0; it < 200; ++it) {
    if (hi - lo <= 1e-11 * hi || hi < 1e-280) break;
    const double mid = 0.5 * (lo + hi);
    if (log_survival(mid) > log_target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

BoundDistribution make_distribution(const YearSummary& summary, Tail tail, BoundFamily family) {
  BoundDistribution dist;
  dist.year = summary.year;
  dist.tail = tail;
  dist.family = family;
  dist.expected_total = summary.expected_total;
  dist.degenerate = summary.degenerate();
  if (!dist.degenerate) dist.stats = tail_stats(summary, tail);
  return dist;
}

double survival_g(const BoundDistribution& dist, double s) {
  const double diff = dist.tail == Tail::upper ? s - dist.expected_total
                                               : dist.expected_total - s;
  if (dist.degenerate) return diff <= 0.0 ? 1.0 : 0.0;
  const double t = diff / dist.stats.n;
  if (t <= 0.0) return 1.0;
  const double lb = dist.stats.n * log_bound(dist.family, t, dist.stats);
  return lb >= 0.0 ? 1.0 : std::exp(lb);
}

double invert_direct(const BoundDistribution& dist, double u) {
  if (!(u > 0.0 && u < 1.0)) throw ValidationError("invert_direct: u must be in (0,1)");
  // F+(s) = u means g_hi(s) = 1-u; F-(s) = u means g_lo(s) = u.
  const double target = dist.tail == Tail::upper ? 1.0 - u : u;
  if (dist.degenerate || target >= 1.0) return dist.expected_total;
  const double tprime =
      invert_exceedance(dist.family, dist.stats, std::log(target));
  return position_of(dist.expected_total, dist.tail, tprime);
}

double bernstein_invert_exceedance(double survival, const SummandStats& stats) {
  if (!(survival > 0.0 && survival <= 1.0))
    throw ValidationError("bernstein_invert_exceedance: survival must be in (0,1]");
  const double logu = std::log(survival);
  const double a = stats.cstar * logu / 3.0;
  return std::sqrt(a * a - 2.0 * stats.n * stats.vbar * logu) - a;
}

std::pair<double, double> coupled_sample(const YearSummary& summary, BoundFamily family,
                                         double u) {
  const double s_minus = invert_direct(make_distribution(summary, Tail::lower, family), u);
  const double s_plus = invert_direct(make_distribution(summary, Tail::upper, family), u);
  return {s_minus, s_plus};
}

WeightedSample bernstein_propose(const YearSummary& summary, Tail tail, std::size_t m,
                                 Rng& rng) {
  WeightedSample out;
  out.year = summary.year;
  out.tail = tail;
  out.expected_total = summary.expected_total;
  out.exceedances.resize(m);
  out.positions.resize(m);
  const SummandStats& stats = tail_stats(summary, tail);
  for (std::size_t i = 0; i < m; ++i) {
    const double tprime = bernstein_invert_exceedance(rng.uniform_pos(), stats);
    out.exceedances[i] = tprime;
    out.positions[i] = position_of(summary.expected_total, tail, tprime);
  }
  return out;
}

double bernstein_proposal_log_density(double tprime, const SummandStats& stats) {
  if (tprime <= 0.0) return -std::numeric_limits<double>::infinity();
  const double nv = stats.n * stats.vbar;
  const double d3 = nv + stats.cstar * tprime / 3.0;
  const double d6 = nv + stats.cstar * tprime / 6.0;
  return std::log(d6 * tprime) - 2.0 * std::log(d3) - 0.5 * tprime * tprime / d3;
}

double bound_sample_log_survival(double tprime, const SummandStats& stats) {
  if (tprime <= 0.0) return 0.0;
  return stats.n * log_bound(BoundFamily::b2, tprime / stats.n, stats);
}

double bound_sample_log_density(double tprime, const SummandStats& stats) {
  if (tprime <= 0.0) return -std::numeric_limits<double>::infinity();
  const double t = tprime / stats.n;
  const LambdaStar ls = lambda_star_full(t, stats);
  const double lambda = ls.lambda;
  const double u = lambda * stats.cstar;
  // At lambda = lambda*(t), n dB/dlambda - t' = -n K1 c*^2 lambda^3 f3(u),
  // so the density prefactor is lambda + K1 c*^2 lambda^3 f3(u) dlambda/dt:
  // nonnegative term by term.
  const double prefactor =
      lambda + stats.K1 * stats.cstar * stats.cstar * lambda * lambda * lambda * f_k(u, 3) *
                   ls.dlambda_dt;
  const double log_survival = stats.n * (mgf_bound(lambda, stats) - lambda * t);
  return std::log(prefactor) + log_survival;
}

void compute_importance_weights(WeightedSample& sample, const YearSummary& summary) {
  const SummandStats& stats = tail_stats(summary, sample.tail);
  const std::size_t m = sample.exceedances.size();
  sample.raw_weights.resize(m);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double tprime = sample.exceedances[i];
    double w;
    if (tprime <= 0.0) {
      w = 1.0;  // t' = 0 happens with probability zero; both densities vanish
    } else {
      const double logw = bound_sample_log_density(tprime, stats) -
                          bernstein_proposal_log_density(tprime, stats);
      w = std::exp(logw);
    }
    if (!std::isfinite(w))
      throw NumericError("importance weight not finite for year " +
                         std::to_string(summary.year) + " at t' = " +
                         std::to_string(tprime));
    sample.raw_weights[i] = w;
    sum += w;
    sum_sq += w * w;
  }
  if (!(sum > 0.0))
    throw NumericError("importance weights sum to zero for year " +
                       std::to_string(summary.year));
  sample.weights.resize(m);
  for (std::size_t i = 0; i < m; ++i) sample.weights[i] = sample.raw_weights[i] / sum;
  sample.ess = sum * sum / sum_sq;
}

std::vector<double> residual_resample(const WeightedSample& sample, Rng& rng) {
  const std::size_t m = sample.positions.size();
  std::vector<double> out;
  out.reserve(m);
  std::vector<double> residual(m);
  double residual_sum = 0.0;
  std::size_t assigned = 0;
  const double dm = static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    // the 1e-9 nudge keeps exact integer expectations (e.g. uniform weights)
    // from losing a copy to rounding
    const double scaled = dm * sample.weights[i];
    const double copies = std::floor(scaled + 1e-9);
    for (double c = 0; c < copies; ++c) out.push_back(sample.positions[i]);
    assigned += static_cast<std::size_t>(copies);
    residual[i] = std::max(0.0, scaled - copies);
    residual_sum += residual[i];
  }
  const std::size_t remaining = m - assigned;
  if (remaining > 0) {
    // multinomial draws from the residual weights by inverse cdf
    std::vector<double> cum(residual.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < residual.size(); ++i) {
      acc += residual[i];
      cum[i] = acc;
    }
    for (std::size_t d = 0; d < remaining; ++d) {
      const double target = rng.uniform() * acc;
      const auto it = std::lower_bound(cum.begin(), cum.end(), target);
      const std::size_t idx = std::min<std::size_t>(
          static_cast<std::size_t>(it - cum.begin()), residual.size() - 1);
      out.push_back(sample.positions[idx]);
    }
  }
  return out;
}

ConservativeRun run_conservative(const std::vector<YearSummary>& summaries, std::size_t m,
                                 BoundFamily family, SamplePath path, std::uint64_t seed,
                                 int threads, std::uint64_t run_tag) {
  if (m == 0) throw ValidationError("run_conservative: need at least one replicate");
  if (path == SamplePath::sir) {
    if (family != BoundFamily::b2)
      throw ConfigError("the SIR path requires bound family B2");
  } else {
    if (family != BoundFamily::bennett && family != BoundFamily::b1 &&
        family != BoundFamily::b2 && family != BoundFamily::b3)
      throw ConfigError("the direct path supports Bennett, B1, B2 or B3, got " +
                        to_string(family));
  }

  const std::size_t n_years = summaries.size();
  ConservativeRun run;
  run.lower.method = path == SamplePath::sir ? SimMethod::sir_fminus : SimMethod::direct_fminus;
  run.upper.method = path == SamplePath::sir ? SimMethod::sir_fplus : SimMethod::direct_fplus;
  for (auto* matrix : {&run.lower, &run.upper}) {
    matrix->seed = seed;
    matrix->n_replicates = m;
    matrix->years.reserve(n_years);
    for (const auto& s : summaries) matrix->years.push_back(s.year);
    matrix->values.assign(m * n_years, 0.0);
  }

  std::vector<double> ess_fraction(n_years, 1.0);

  parallel_for(n_years, threads, [&](std::size_t y) {
    const YearSummary& summary = summaries[y];
    const std::uint64_t year_key =
        (run_tag << 32) | static_cast<std::uint32_t>(summary.year);
    if (summary.degenerate()) {
      for (std::size_t i = 0; i < m; ++i) {
        run.lower.at(i, y) = summary.expected_total;
        run.upper.at(i, y) = summary.expected_total;
      }
      return;
    }
    if (path == SamplePath::direct) {
      const auto lower_dist = make_distribution(summary, Tail::lower, family);
      const auto upper_dist = make_distribution(summary, Tail::upper, family);
      for (std::size_t i = 0; i < m; ++i) {
        Rng rng(seed, StreamPurpose::direct_inversion, year_key, i);
        const double u = rng.uniform_pos();
        run.lower.at(i, y) = invert_direct(lower_dist, u);
        run.upper.at(i, y) = invert_direct(upper_dist, u);
      }
      return;
    }
    // SIR path; F- and F+ are separate runs, coupled per rank after sorting.
    // With enough replicates the per-year weight table amortizes the Lambert
    // W work across draws; below the knot count the exact path is cheaper.
    const bool use_table = m >= static_cast<std::size_t>(k_weight_knots);
    double min_frac = 1.0;
    for (Tail tail : {Tail::lower, Tail::upper}) {
      const std::uint64_t side = tail == Tail::upper ? 1 : 0;
      Rng proposal_rng(seed, StreamPurpose::sir_proposal, year_key, side);
      Rng resample_rng(seed, StreamPurpose::sir_resample, year_key, side);
      ReplicateMatrix& matrix = tail == Tail::upper ? run.upper : run.lower;
      if (use_table) {
        min_frac = std::min(
            min_frac, sir_column_with_table(summary, tail, m, proposal_rng, resample_rng,
                                            [&](std::size_t i, double v) { matrix.at(i, y) = v; }));
      } else {
        WeightedSample sample = bernstein_propose(summary, tail, m, proposal_rng);
        compute_importance_weights(sample, summary);
        min_frac = std::min(min_frac, sample.ess / static_cast<double>(m));
        std::vector<double> values = residual_resample(sample, resample_rng);
        std::sort(values.begin(), values.end());
        for (std::size_t i = 0; i < m; ++i) matrix.at(i, y) = values[i];
      }
    }
    ess_fraction[y] = min_frac;
  });

  for (std::size_t y = 0; y < n_years; ++y) {
    if (ess_fraction[y] < run.min_ess_fraction) {
      run.min_ess_fraction = ess_fraction[y];
      run.min_ess_year = summaries[y].year;
    }
  }
  return run;
}

}  // namespace losscap
