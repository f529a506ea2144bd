#include "losscap/bounds.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "losscap/errors.hpp"

namespace losscap {

namespace {

constexpr double k_inv_e = 0.36787944117144232160;  // 1/e

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Golden-section minimization of a unimodal objective on [lo, hi].
template <typename Fn>
double golden_min(Fn&& fn, double lo, double hi, double tol) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = fn(c), fd = fn(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = fn(d);
    }
  }
  return fc < fd ? fc : fd;
}

// Brackets the minimizer of a convex objective with fn(0) = 0, fn'(0) < 0 by
// doubling from `start`, then golden-sections to 1e-10 (relative to the
// bracket when the bracket is large). Returns the minimum value.
template <typename Fn>
double minimize_convex(Fn&& fn, double start) {
  double hi = start > 0 ? start : 1.0;
  double fhi = fn(hi);
  double fprev = 0.0;  // fn(0)
  int doublings = 0;
  while (fhi < fprev && doublings < 400) {
    fprev = fhi;
    hi *= 2.0;
    fhi = fn(hi);
    ++doublings;
  }
  double tol = 1e-10 * std::max(1.0, hi);
  return golden_min(fn, 0.0, hi, tol);
}

struct Params {
  double n, vbar, K, K1, cstar;
};

Params params_of(const SummandStats& s) { return {s.n, s.vbar, s.K, s.K1, s.cstar}; }

// B(lambda) in the cancellation-free arrangement
//   vbar lambda^2/2 + (K/6) lambda^3 c* + (K-K1) lambda^4 c*^2 f4(lambda c*),
// every term nonnegative (K >= K1).
double mgf_bound_impl(double lambda, const Params& p) {
  if (lambda < 0.0) throw ValidationError("mgf_bound: lambda must be nonnegative");
  if (lambda == 0.0) return 0.0;
  const double u = lambda * p.cstar;
  const double l2 = lambda * lambda;
  return 0.5 * l2 * p.vbar + (p.K / 6.0) * l2 * lambda * p.cstar +
         (p.K - p.K1) * l2 * l2 * p.cstar * p.cstar * f_k(u, 4);
}

double mgf_bound_derivative_impl(double lambda, const Params& p) {
  if (lambda < 0.0) throw ValidationError("mgf_bound_derivative: lambda must be nonnegative");
  if (lambda == 0.0) return 0.0;
  const double u = lambda * p.cstar;
  return lambda * p.vbar + 0.5 * p.K * lambda * lambda * p.cstar +
         (p.K - p.K1) * p.cstar * p.cstar * lambda * lambda * lambda * f_k(u, 3);
}

LambdaStar lambda_star_impl(double t, const Params& p) {
  LambdaStar out;
  if (p.vbar <= 0.0) throw ValidationError("lambda_star: vbar must be positive");
  const double gap = p.vbar - p.K;
  if (gap <= 0.0) {
    // Degenerate K = vbar (all c_i equal c*): B'(lambda; K, 0) = t reads
    // (vbar/c*)(e^{lambda c*} - 1) = t, solved directly.
    out.lambda = std::log1p(t * p.cstar / p.vbar) / p.cstar;
    out.w = std::numeric_limits<double>::infinity();
    out.dlambda_dt = 1.0 / (p.vbar + t * p.cstar);
    return out;
  }
  if (t <= 0.0) {
    out.lambda = 0.0;
    out.w = p.K > 0.0 ? p.K / gap : 0.0;
    out.dlambda_dt = 1.0 / (gap * (1.0 + out.w));
    return out;
  }
  const double r = (p.K + t * p.cstar) / gap;
  double w;
  double delta;  // lambda* c* = r - w
  if (p.K == 0.0) {
    w = 0.0;  // W(0) = 0, pure sub-Gaussian case
    delta = r;
  } else {
    const double log_a = std::log(p.K / gap);
    const double y = log_a + r;  // the W argument is e^y
    if (y >= 3.0) {
      // Forming r - W(e^y) directly cancels catastrophically when r is
      // large (near-degenerate K). Solve for delta = r - w instead:
      // w + log w = y rearranges to delta = log(r - delta) - log_a, a
      // contraction with factor 1/w < 1/2 here.
      delta = std::min(std::max(0.0, std::log(r) - log_a), r * 0.999999);
      for (int i = 0; i < 60; ++i) {
        const double next = std::log(r - delta) - log_a;
        const double change = std::abs(next - delta);
        delta = next;
        if (change <= 1e-16 * (1.0 + delta)) break;
      }
      if (delta < 0.0) delta = 0.0;
      w = r - delta;
    } else {
      w = lambert_w0(std::exp(y));  // y < 3, no overflow possible
      delta = std::max(0.0, r - w);
    }
  }
  out.lambda = delta / p.cstar;
  out.w = w;
  out.dlambda_dt = 1.0 / (gap * (1.0 + w));
  return out;
}

double b_higher_mgf(double lambda, const SummandStats& s, int J) {
  // Appendix-style refinement, arranged with nonnegative coefficients:
  //   vbar l^2/2 + (K/6) l^3 c*
  //   + sum_{j=0}^{J-1} (K - K_{j+1}) l^{j+4} c*^{j+2} / (j+4)!
  //   + (K - K_{J+1}) l^{J+4} c*^{J+2} f_{J+4}(l c*)
  if (lambda == 0.0) return 0.0;
  const double u = lambda * s.cstar;
  double value = 0.5 * lambda * lambda * s.vbar + (s.K / 6.0) * lambda * lambda * lambda * s.cstar;
  auto K_index = [&](int j) {  // K_j for j >= 1
    return j == 1 ? s.K1 : s.Kj.at(static_cast<std::size_t>(j - 2));
  };
  double pow_term = lambda * lambda * lambda * lambda * s.cstar * s.cstar;  // l^4 c*^2
  for (int j = 0; j < J; ++j) {
    value += (s.K - K_index(j + 1)) * pow_term / factorial(j + 4);
    pow_term *= u;
  }
  value += (s.K - K_index(J + 1)) * pow_term * f_k(u, J + 4);
  return value;
}

}  // namespace

void SummandStats::validate() const {
  const double slack = 1e-12 * std::max(1.0, vbar);
  if (!(n >= 1.0)) throw ValidationError("SummandStats: n must be >= 1");
  if (!(cstar > 0.0)) throw ValidationError("SummandStats: cstar must be positive");
  if (!(vbar >= 0.0)) throw ValidationError("SummandStats: vbar must be nonnegative");
  if (K1 < -slack || K < K1 - slack || vbar < K - slack)
    throw ValidationError("SummandStats: need 0 <= K1 <= K <= vbar");
  double prev = K1;
  for (double kj : Kj) {
    if (kj < prev - slack || kj > K + slack)
      throw ValidationError("SummandStats: Kj must be nondecreasing and <= K");
    prev = kj;
  }
}

std::string to_string(BoundFamily family) {
  switch (family) {
    case BoundFamily::hoeffding: return "Hoeffding";
    case BoundFamily::bennett: return "Bennett";
    case BoundFamily::b1: return "B1";
    case BoundFamily::b2: return "B2";
    case BoundFamily::b3: return "B3";
    case BoundFamily::bernstein: return "Bernstein";
    case BoundFamily::clt_approx: return "CLT-approx";
    case BoundFamily::b_lb: return "B-lb";
    case BoundFamily::b_higher: return "B-higher";
  }
  return "?";
}

BoundFamily family_from_string(const std::string& name) {
  std::string low;
  low.reserve(name.size());
  for (char c : name) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (low == "hoeffding") return BoundFamily::hoeffding;
  if (low == "bennett") return BoundFamily::bennett;
  if (low == "b1") return BoundFamily::b1;
  if (low == "b2") return BoundFamily::b2;
  if (low == "b3") return BoundFamily::b3;
  if (low == "bernstein") return BoundFamily::bernstein;
  if (low == "clt" || low == "clt-approx") return BoundFamily::clt_approx;
  if (low == "b-lb" || low == "blb") return BoundFamily::b_lb;
  if (low == "b-higher" || low == "bhigher") return BoundFamily::b_higher;
  throw ConfigError("unknown bound family: " + name);
}

double f_k(double u, int k) {
  if (k < 1) throw ValidationError("f_k: k must be >= 1");
  if (std::abs(u) <= 0.5) {
    // series sum_j u^j/(j+k)!; the closed form cancels catastrophically here
    double term = 1.0 / factorial(k);
    double sum = term;
    for (int j = 1; j < 80; ++j) {
      term *= u / (k + j);
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
  }
  double partial = 0.0, t = 1.0;
  for (int j = 0; j < k; ++j) {
    partial += t;
    t *= u / (j + 1);
  }
  return (std::exp(u) - partial) / std::pow(u, k);
}

double h(double u) {
  if (u < 0.0) throw ValidationError("h: u must be nonnegative");
  return (1.0 + u) * std::log1p(u) - u;
}

double lambert_w0(double x) {
  if (std::isnan(x)) throw ValidationError("lambert_w0: x is NaN");
  if (x < -k_inv_e) {
    // allow 1-ulp undershoot at the branch point
    if (x > -k_inv_e - 1e-15) return -1.0;
    throw ValidationError("lambert_w0: x below -1/e");
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;

  double w;
  if (x < -0.30) {
    // branch-point series in p = sqrt(2(1 + e x))
    const double p = std::sqrt(2.0 * (1.0 + x * std::exp(1.0)));
    w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)));
  } else if (x < 0.3) {
    w = x * (1.0 - x * (1.0 - 1.5 * x));
  } else if (x < 7.4) {
    const double l = std::log1p(x);
    w = l * (1.0 - std::log1p(l) / (2.0 + l));
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }

  for (int i = 0; i < 10; ++i) {
    const double wp1 = w + 1.0;
    if (std::abs(wp1) < 1e-7) break;  // branch-point series is already tight
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(w))) break;
  }
  return w;
}

double lambert_w0_of_exp(double y) {
  if (y < 1.0) return lambert_w0(std::exp(y));
  // solve w + log w = y; Newton, monotone and well conditioned for w >= 1
  double w = y - std::log(y);
  for (int i = 0; i < 20; ++i) {
    const double g = w + std::log(w) - y;
    const double step = g * w / (w + 1.0);
    w -= step;
    if (std::abs(step) <= 1e-16 * w) break;
  }
  return w;
}

double mgf_bound(double lambda, const SummandStats& stats) {
  return mgf_bound_impl(lambda, params_of(stats));
}

double mgf_bound_derivative(double lambda, const SummandStats& stats) {
  return mgf_bound_derivative_impl(lambda, params_of(stats));
}

LambdaStar lambda_star_full(double t, const SummandStats& stats) {
  return lambda_star_impl(t, params_of(stats));
}

double lambda_star(double t, const SummandStats& stats) {
  return lambda_star_impl(t, params_of(stats)).lambda;
}

double bennett_log_bound(double t, const SummandStats& stats) {
  if (t <= 0.0) return 0.0;  // trivial bound
  if (stats.vbar <= 0.0) return -std::numeric_limits<double>::infinity();
  const double c2 = stats.cstar * stats.cstar;
  return -(stats.vbar / c2) * h(stats.cstar * t / stats.vbar);
}

double hoeffding_log_bound(double t, double mean_sq_range) {
  if (!(mean_sq_range > 0.0))
    throw ValidationError("hoeffding_log_bound: mean squared range must be positive");
  if (t <= 0.0) return 0.0;
  return -2.0 * t * t / mean_sq_range;
}

double bernstein_log_bound(double t, const SummandStats& stats) {
  if (t <= 0.0) return 0.0;
  return -0.5 * t * t / (stats.vbar + stats.cstar * t / 3.0);
}

double clt_log_approx(double t, const SummandStats& stats) {
  if (t <= 0.0) return 0.0;
  if (stats.vbar <= 0.0) return -std::numeric_limits<double>::infinity();
  return -0.5 * t * t / stats.vbar;
}

double log_bound(BoundFamily family, double t, const SummandStats& stats, int higher_order) {
  if (t <= 0.0) return 0.0;
  const Params p = params_of(stats);
  switch (family) {
    case BoundFamily::hoeffding:
      if (!(stats.mean_sq_range > 0.0))
        throw ConfigError("Hoeffding bound requested but mean_sq_range is unavailable");
      return hoeffding_log_bound(t, stats.mean_sq_range);
    case BoundFamily::bennett:
      return bennett_log_bound(t, stats);
    case BoundFamily::bernstein:
      return bernstein_log_bound(t, stats);
    case BoundFamily::clt_approx:
      return clt_log_approx(t, stats);
    case BoundFamily::b2: {
      const double l = lambda_star_impl(t, p).lambda;
      return mgf_bound_impl(l, p) - l * t;
    }
    case BoundFamily::b3: {
      const double l = lambda_star_impl(t, p).lambda;
      Params p0 = p;
      p0.K1 = 0.0;
      return mgf_bound_impl(l, p0) - l * t;
    }
    case BoundFamily::b1: {
      const double lstar = lambda_star_impl(t, p).lambda;
      auto objective = [&](double l) { return mgf_bound_impl(l, p) - l * t; };
      // The full-K1 minimizer sits at or beyond lambda*; keep B1 <= B2 exact
      // by including the lambda* value in the minimum.
      const double at_lstar = objective(lstar);
      const double start = lstar > 0.0 ? lstar : t / std::max(p.vbar, 1e-300);
      return std::min(at_lstar, minimize_convex(objective, start));
    }
    case BoundFamily::b_lb: {
      // B(l) - l^5 c*^3 (K-K1) f5(l c*) telescopes to an exact quartic: the
      // f5 tail cancels the f4 tail of B term by term.
      auto objective = [&](double l) {
        const double l2 = l * l;
        return 0.5 * l2 * p.vbar + (p.K / 6.0) * l2 * l * p.cstar +
               ((p.K - p.K1) / 24.0) * l2 * l2 * p.cstar * p.cstar - l * t;
      };
      const double lstar = lambda_star_impl(t, p).lambda;
      const double start = lstar > 0.0 ? lstar : t / std::max(p.vbar, 1e-300);
      return minimize_convex(objective, start);
    }
    case BoundFamily::b_higher: {
      const int J = higher_order;
      if (J < 1) throw ConfigError("B-higher: order must be >= 1");
      if (static_cast<int>(stats.Kj.size()) < J)
        throw ConfigError("B-higher(" + std::to_string(J) + ") needs K_2..K_" +
                          std::to_string(J + 1) + " but only " +
                          std::to_string(stats.Kj.size()) + " higher summaries are present");
      auto objective = [&](double l) { return b_higher_mgf(l, stats, J) - l * t; };
      const double lstar = lambda_star_impl(t, p).lambda;
      const double start = lstar > 0.0 ? lstar : t / std::max(p.vbar, 1e-300);
      return minimize_convex(objective, start);
    }
  }
  throw ConfigError("log_bound: unhandled bound family");
}

double bernstein_survival(double tprime, const SummandStats& stats) {
  if (tprime <= 0.0) return 1.0;
  const double denom = stats.n * stats.vbar + stats.cstar * tprime / 3.0;
  if (denom <= 0.0) return 0.0;
  const double log_s = -0.5 * tprime * tprime / denom;
  return log_s >= 0.0 ? 1.0 : std::exp(log_s);
}

}  // namespace losscap
