#pragma once

// Conservative-sample generation.
//
// For a year with summand count n, expected total E and tail statistics, the
// chosen bound family induces
//
//   g_hi(s) = min(1, exp[n * log_bound(t)]),  t = (s - E)/n   (upper tail)
//   g_lo(s) = min(1, exp[n * log_bound(t)]),  t = (E - s)/n   (lower tail)
//
// and F+(s) = 1 - g_hi(s), F-(s) = g_lo(s) bracket the true cdf of the
// yearly total. The direct path inverts both at a shared u ~ Unif(0,1), so
// each replicate's pair (s-, s+) sandwiches the hypothetical draw from the
// true distribution. The fast path samples F+/F- exceedances from the
// Bernstein survival function
//
//   S_Ber(t') = exp[-t'^2/2 / (n vbar + c* t'/3)],
//
// which inverts in closed form, then importance-weights against the B2
// target S_BS(t') = exp[n B(lambda) - lambda t'], lambda = lambda*(t'/n),
// and residual-resamples back to an unweighted set.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "losscap/bounds.hpp"
#include "losscap/mc.hpp"
#include "losscap/portfolio.hpp"
#include "losscap/rng.hpp"

namespace losscap {

enum class Tail { lower, upper };

struct BoundDistribution {
  std::int32_t year = 0;
  Tail tail = Tail::upper;
  BoundFamily family = BoundFamily::b2;
  SummandStats stats;
  double expected_total = 0;
  bool degenerate = false;  // point mass at expected_total
};

BoundDistribution make_distribution(const YearSummary& summary, Tail tail, BoundFamily family);

// g(s): survival bound for the upper tail, cdf bound for the lower tail.
// Equals 1 on the wrong side of the mean; values in [0, 1].
double survival_g(const BoundDistribution& dist, double s);

// Inverse-cdf draw. Upper tail solves g_hi(s) = 1-u, lower solves
// g_lo(s) = u; bracketing by doubling from sqrt(n vbar), then bisection.
// u at the boundary (target >= 1) returns the mean.
double invert_direct(const BoundDistribution& dist, double u);

// Closed-form exceedance of the Bernstein survival function at level
// `survival`: the t' with S_Ber(t') = survival.
double bernstein_invert_exceedance(double survival, const SummandStats& stats);

// One u drives both inversions; s_minus <= s_plus always.
std::pair<double, double> coupled_sample(const YearSummary& summary, BoundFamily family,
                                         double u);

struct WeightedSample {
  std::int32_t year = 0;
  Tail tail = Tail::upper;
  double expected_total = 0;
  std::vector<double> exceedances;  // t' >= 0
  std::vector<double> positions;    // totals: E + t' (upper) or E - t' (lower)
  std::vector<double> raw_weights;  // w* = f/q
  std::vector<double> weights;      // normalized to the simplex
  double ess = 0;                   // (sum w*)^2 / sum w*^2
};

// M independent draws from the Bernstein proposal for the given tail.
WeightedSample bernstein_propose(const YearSummary& summary, Tail tail, std::size_t m,
                                 Rng& rng);

// log q(t'): Bernstein proposal density (the negated derivative of S_Ber).
double bernstein_proposal_log_density(double tprime, const SummandStats& stats);
// log S_BS(t') = n * B2(t'/n).
double bound_sample_log_survival(double tprime, const SummandStats& stats);
// log f_BS(t'): density of the B2-implied exceedance distribution,
// -dS_BS/dt' = [lambda + K1 c*^2 lambda^3 f3(lambda c*) dlambda/dt] S_BS.
double bound_sample_log_density(double tprime, const SummandStats& stats);

// Fills raw_weights/weights/ess with target B2. Throws NumericError (naming
// the year and t') on any non-finite weight.
void compute_importance_weights(WeightedSample& sample, const YearSummary& summary);

// floor(M w_i) deterministic copies, multinomial remainder; output size
// equals the input size.
std::vector<double> residual_resample(const WeightedSample& sample, Rng& rng);

enum class SamplePath { direct, sir };

struct ConservativeRun {
  ReplicateMatrix lower;  // F- samples
  ReplicateMatrix upper;  // F+ samples
  double min_ess_fraction = 1.0;  // SIR only: min over years of ESS/M
  std::int32_t min_ess_year = 0;
};

// The direct path supports Bennett/B1/B2/B3; the SIR path requires B2 (the
// dlambda/dt' needed by the weights exists only for the closed-form
// minimizer). run_tag separates repeated runs (e.g. sensitivity replicates)
// into disjoint substreams.
ConservativeRun run_conservative(const std::vector<YearSummary>& summaries, std::size_t m,
                                 BoundFamily family, SamplePath path, std::uint64_t seed,
                                 int threads = 0, std::uint64_t run_tag = 0);

}  // namespace losscap
