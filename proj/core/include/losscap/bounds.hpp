#pragma once

// Concentration-inequality kernel for sums S_n of independent, centred,
// upper-bounded summands.
//
// Everything here works per summand: a bound family maps (t, stats) to an
// upper bound on (1/n) log P(S_n >= n t). Inputs are the year summaries
//
//   vbar = (1/n) sum sigma_i^2
//   K    = (1/n) sum sigma_i^2 (c_i/c*)
//   K1   = (1/n) sum sigma_i^2 (c_i/c*)(1 - c_i/c*)
//   K_j  = (1/n) sum sigma_i^2 (c_i/c*)(1 - (c_i/c*)^j)
//
// with c_i the per-summand upper support bound and c* = max c_i. The moment
// generating function bound is
//
//   B(lambda) = lambda^2 vbar/2 + lambda^2 K {f2(lambda c*) - 1/2}
//               - lambda^4 c*^2 K1 f4(lambda c*),
//
// where f_k(u) = sum_{j>=0} u^j/(j+k)!. Families:
//
//   B1       = inf_lambda { B(lambda) - lambda t }            (numerical)
//   B2       = B(lambda*) - lambda* t                         (closed form)
//   B3       = B(lambda*; K1=0) - lambda* t                   (closed form)
//   Bennett  = -(vbar/c*^2) h(c* t / vbar),  h(u) = (1+u)log(1+u) - u
//   B-lb     = inf_lambda { B(lambda) - lambda^5 c*^3 (K-K1) f5(lambda c*)
//                           - lambda t }     (floor on any Bennett-like bound)
//   B-higher = the K_j refinement of B, minimized numerically
//   Hoeffding, Bernstein, CLT-approx: the classical references.
//
// lambda* is the exact minimizer of the K1=0 problem,
//   lambda* = (1/c*)[ (K+t c*)/(vbar-K) - W( K/(vbar-K) e^{(K+t c*)/(vbar-K)} ) ],
// with W the principal Lambert W branch.
//
// All functions are pure; call them from as many threads as you like.

#include <string>
#include <vector>

namespace losscap {

struct SummandStats {
  double n = 0;      // number of centred summands contributing
  double vbar = 0;   // mean variance per summand
  double K = 0;      // support-weighted variance summary
  double K1 = 0;     // first correction summary
  double cstar = 0;  // max upper support bound among summands
  // Optional higher-order summaries K_2, K_3, ... (index j-2). Empty means
  // they were not computed.
  std::vector<double> Kj;
  // (1/n) sum (range_i)^2 for Hoeffding; 0 means unavailable.
  double mean_sq_range = 0;

  // Throws ValidationError unless 0 <= K1 <= K <= vbar (within slack),
  // cstar > 0, n >= 1, and the Kj entries are nondecreasing and <= K.
  void validate() const;
};

enum class BoundFamily {
  hoeffding,
  bennett,
  b1,
  b2,
  b3,
  bernstein,
  clt_approx,
  b_lb,
  b_higher,
};

// Display tags: "Hoeffding", "Bennett", "B1", "B2", "B3", "Bernstein",
// "CLT-approx", "B-lb", "B-higher". Parse is case-insensitive.
std::string to_string(BoundFamily family);
BoundFamily family_from_string(const std::string& name);

// f_k(u) = sum_{j>=0} u^j/(j+k)!; series below |u| = 0.5, closed form
// (e^u - partial sum)/u^k above. Stable on u >= 0, total on finite u.
double f_k(double u, int k);

// h(u) = (1+u) log(1+u) - u for u >= 0; rejects negative u.
double h(double u);

// Principal Lambert W branch on [-1/e, inf); Halley iteration.
double lambert_w0(double x);
// W(e^y) without forming e^y; requires y >= 1 (used for huge arguments).
double lambert_w0_of_exp(double y);

// B(lambda) for lambda >= 0; B(0) = 0. Rejects negative lambda.
double mgf_bound(double lambda, const SummandStats& stats);
// dB/dlambda = lambda vbar + (K/2) lambda^2 c* + (K-K1) c*^2 lambda^3 f3(lambda c*).
double mgf_bound_derivative(double lambda, const SummandStats& stats);

// Minimizer of the K1=0 Chernoff problem plus the quantities the sampler
// needs alongside it: the W value from the closed form and
// dlambda/dt = 1/((vbar-K)(1+W)) (per-summand t).
struct LambdaStar {
  double lambda = 0;
  double w = 0;            // W(.) from the closed form; 0 in the degenerate path
  double dlambda_dt = 0;   // derivative of the minimizer wrt per-summand t
};
LambdaStar lambda_star_full(double t, const SummandStats& stats);
double lambda_star(double t, const SummandStats& stats);

double bennett_log_bound(double t, const SummandStats& stats);
// mean_sq_range = (1/n) sum (c_i - a_i)^2, supplied by the caller.
double hoeffding_log_bound(double t, double mean_sq_range);
double bernstein_log_bound(double t, const SummandStats& stats);
double clt_log_approx(double t, const SummandStats& stats);

// Per-family (1/n) log P(S_n >= n t) bound; 0 for t <= 0. `higher_order` is
// the J of the B-higher family (needs K_2..K_{J+1} present in stats.Kj).
double log_bound(BoundFamily family, double t, const SummandStats& stats,
                 int higher_order = 3);

// P(S_n >= t') <= exp[-t'^2/2 / (n vbar + c* t'/3)], clamped to <= 1.
// Note t' is the raw (not per-summand) exceedance.
double bernstein_survival(double tprime, const SummandStats& stats);

}  // namespace losscap
