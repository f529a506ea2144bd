#include "losscap/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "losscap/csv.hpp"
#include "losscap/errors.hpp"
#include "losscap/parallel.hpp"
#include "losscap/rng.hpp"

namespace losscap {

namespace {

// Degenerate Beta encoding for damage ratio = 1 in the toy scenarios: mu
// rounds to exactly 1.0 in double and the Beta variance vanishes.
constexpr double k_toy_alpha = 1e10;
constexpr double k_toy_beta = 1e-10;

void validate_event_fields(double p, double alpha, double beta, const std::string& where) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(where + ": p must be in [0,1]");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError(where + ": alpha must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError(where + ": beta must be positive");
}

}  // namespace

std::size_t Portfolio::require(const std::string& id, const std::string& context) const {
  auto it = index.find(id);
  if (it == index.end()) throw ValidationError(context + ": unknown risk_id '" + id + "'");
  return it->second;
}

std::int64_t Portfolio::total_subrisks() const {
  std::int64_t total = 0;
  for (const auto& r : risks) total += r.n_sub;
  return total;
}

std::int32_t EventTable::max_year() const {
  std::int32_t m = 0;
  for (const auto& row : rows) m = std::max(m, row.year);
  return m;
}

TermMoments term_moments(const LossTerm& term) {
  TermMoments m;
  const double ab = term.alpha + term.beta;
  const double mu = term.alpha / ab;
  const double beta_var = term.alpha * term.beta / (ab * ab * (ab + 1.0));
  const double pmu = term.p * mu;
  m.mean = term.exposure * pmu;
  // Var[e Z] with Z the {0 w.p. 1-p; Beta otherwise} mixture:
  // e^2 (p E[B^2] - p^2 mu^2)
  m.variance = term.exposure * term.exposure * (term.p * (beta_var + mu * mu) - pmu * pmu);
  if (m.variance < 0.0) m.variance = 0.0;  // FP guard, exact value is >= 0
  m.c_upper = term.exposure * (1.0 - pmu);
  m.c_lower = term.exposure * pmu;
  m.a_lower = -m.c_lower;
  return m;
}

YearSummary year_summary(std::int32_t year, std::span<const LossTerm> terms, int max_kj) {
  YearSummary out;
  out.year = year;

  double n = 0;
  double sum_mean = 0, sum_var = 0, sum_sq_range = 0;
  double sum_p = 0, sum_mu = 0;
  double cstar_up = 0, cstar_lo = 0;

  struct Cached {
    double w;  // n_sub
    double var, c_up, c_lo;
  };
  std::vector<Cached> cache;
  cache.reserve(terms.size());

  for (const auto& term : terms) {
    if (!(term.p > 0.0)) continue;  // zero-probability rows carry no loss
    const TermMoments m = term_moments(term);
    const double w = static_cast<double>(term.n_sub);
    n += w;
    sum_mean += w * m.mean;
    sum_var += w * m.variance;
    sum_sq_range += w * term.exposure * term.exposure;
    sum_p += w * term.p;
    sum_mu += w * (term.alpha / (term.alpha + term.beta));
    cstar_up = std::max(cstar_up, m.c_upper);
    cstar_lo = std::max(cstar_lo, m.c_lower);
    cache.push_back({w, m.variance, m.c_upper, m.c_lower});
  }

  out.n = static_cast<std::int64_t>(std::llround(n));
  out.expected_total = sum_mean;
  out.descriptive.n_p_gt0 = out.n;
  if (out.n == 0) return out;  // degenerate year, loss identically zero

  auto fill = [&](SummandStats& s, bool upper, double cstar) {
    s.n = n;
    s.cstar = cstar;
    s.vbar = sum_var / n;
    s.mean_sq_range = sum_sq_range / n;
    double k = 0, k1 = 0;
    std::vector<double> kj(max_kj >= 2 ? max_kj - 1 : 0, 0.0);
    for (const auto& c : cache) {
      const double ci = upper ? c.c_up : c.c_lo;
      const double ratio = cstar > 0 ? ci / cstar : 0.0;
      const double base = c.w * c.var * ratio;
      k += base;
      k1 += base * (1.0 - ratio);
      double rj = ratio;
      for (std::size_t j = 0; j < kj.size(); ++j) {
        rj *= ratio;  // ratio^(j+2)
        kj[j] += base * (1.0 - rj);
      }
    }
    s.K = k / n;
    s.K1 = k1 / n;
    s.Kj.resize(kj.size());
    for (std::size_t j = 0; j < kj.size(); ++j) s.Kj[j] = kj[j] / n;
    // FP guards for the ordering invariants
    s.K = std::min(s.K, s.vbar);
    s.K1 = std::max(0.0, std::min(s.K1, s.K));
  };
  fill(out.upper, true, cstar_up);
  fill(out.lower, false, cstar_lo);

  out.descriptive.p_bar = sum_p / n;
  out.descriptive.mu_bar = sum_mu / n;
  return out;
}

std::vector<YearTerms> terms_by_year(const Portfolio& portfolio, const EventTable& events,
                                     std::int32_t n_years) {
  std::int32_t last = n_years > 0 ? n_years : events.max_year();
  std::vector<YearTerms> out(static_cast<std::size_t>(std::max(last, 0)));
  for (std::int32_t y = 1; y <= last; ++y) out[y - 1].year = y;
  std::vector<std::set<std::int32_t>> seen(out.size());
  for (const auto& row : events.rows) {
    if (row.year < 1 || row.year > last)
      throw ValidationError("event row year " + std::to_string(row.year) +
                            " outside 1.." + std::to_string(last));
    const Risk& risk = portfolio.risks[row.risk];
    LossTerm term;
    term.p = row.p;
    term.alpha = row.alpha;
    term.beta = row.beta;
    term.n_sub = risk.n_sub;
    term.exposure = risk.tiv / static_cast<double>(risk.n_sub);
    out[row.year - 1].terms.push_back(term);
    seen[row.year - 1].insert(row.event);
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i].n_events = static_cast<std::int64_t>(seen[i].size());
  return out;
}

std::vector<YearSummary> summarize_years(const std::vector<YearTerms>& years, int max_kj,
                                         int threads) {
  std::vector<YearSummary> out(years.size());
  parallel_for(years.size(), threads, [&](std::size_t i) {
    out[i] = year_summary(years[i].year, years[i].terms, max_kj);
    out[i].descriptive.n_events = years[i].n_events;
  });
  return out;
}

Portfolio load_portfolio(const std::filesystem::path& path) {
  Portfolio pf;
  CsvReader reader(path, {"risk_id", "total_insured_value", "n_subrisks"});
  std::vector<std::string_view> fields;
  while (reader.next(fields)) {
    Risk r;
    r.id = std::string(fields[0]);
    if (r.id.empty()) throw ValidationError(reader.location() + ": empty risk_id");
    r.tiv = parse_double(fields[1], reader.location());
    r.n_sub = parse_int(fields[2], reader.location());
    if (!(r.tiv > 0.0)) throw ValidationError(reader.location() + ": total_insured_value must be positive");
    if (r.n_sub < 1) throw ValidationError(reader.location() + ": n_subrisks must be >= 1");
    auto [it, inserted] = pf.index.emplace(r.id, pf.risks.size());
    (void)it;
    if (!inserted) throw ValidationError(reader.location() + ": duplicate risk_id '" + r.id + "'");
    pf.risks.push_back(std::move(r));
  }
  return pf;
}

void save_portfolio(const std::filesystem::path& path, const Portfolio& portfolio) {
  auto out = open_output(path);
  out << "risk_id,total_insured_value,n_subrisks\n";
  for (const auto& r : portfolio.risks)
    out << r.id << ',' << format_double(r.tiv) << ',' << r.n_sub << '\n';
}

EventTable load_events(const std::filesystem::path& path, const Portfolio& portfolio) {
  EventTable events;
  CsvReader reader(path, {"year", "event", "risk_id", "p", "alpha", "beta"});
  std::vector<std::string_view> fields;
  while (reader.next(fields)) {
    EventRow row;
    row.year = static_cast<std::int32_t>(parse_int(fields[0], reader.location()));
    row.event = static_cast<std::int32_t>(parse_int(fields[1], reader.location()));
    if (row.year < 1) throw ValidationError(reader.location() + ": year must be >= 1");
    row.risk = static_cast<std::uint32_t>(portfolio.require(std::string(fields[2]), reader.location()));
    row.p = parse_double(fields[3], reader.location());
    row.alpha = parse_double(fields[4], reader.location());
    row.beta = parse_double(fields[5], reader.location());
    validate_event_fields(row.p, row.alpha, row.beta, reader.location());
    events.rows.push_back(row);
  }
  return events;
}

void save_events(const std::filesystem::path& path, const Portfolio& portfolio,
                 const EventTable& events) {
  auto out = open_output(path);
  out << "year,event,risk_id,p,alpha,beta\n";
  for (const auto& row : events.rows) {
    out << row.year << ',' << row.event << ',' << portfolio.risks[row.risk].id << ','
        << format_double(row.p) << ',' << format_double(row.alpha) << ','
        << format_double(row.beta) << '\n';
  }
}

std::string to_string(ToyTag tag) {
  switch (tag) {
    case ToyTag::i: return "i";
    case ToyTag::ii: return "ii";
    case ToyTag::iii: return "iii";
    case ToyTag::iv: return "iv";
  }
  return "?";
}

ToyTag toy_tag_from_string(const std::string& name) {
  if (name == "i") return ToyTag::i;
  if (name == "ii") return ToyTag::ii;
  if (name == "iii") return ToyTag::iii;
  if (name == "iv") return ToyTag::iv;
  throw ConfigError("unknown toy scenario: " + name + " (expected i, ii, iii or iv)");
}

Dataset generate_toy(const ToyScenario& scenario) {
  Dataset data;
  data.portfolio.risks.reserve(static_cast<std::size_t>(scenario.n));
  data.events.rows.reserve(static_cast<std::size_t>(scenario.n));
  Rng rng(scenario.seed, StreamPurpose::toy_generation, static_cast<std::uint64_t>(scenario.tag));
  char id[24];
  for (std::int64_t i = 0; i < scenario.n; ++i) {
    double b = 0;
    switch (scenario.tag) {
      case ToyTag::i: b = std::abs(rng.normal()); break;
      case ToyTag::ii:
      case ToyTag::iv: b = rng.exponential(); break;
      case ToyTag::iii: b = std::pow(rng.uniform_pos(), -0.25); break;  // Pareto, shape 4
    }
    double p;
    if (scenario.tag == ToyTag::iv) {
      p = rng.uniform_pos();
    } else {
      p = 1.0 - std::pow(1.0 - rng.uniform_pos(), 0.1);  // Beta(1, 10) by inverse cdf
    }
    if (!(b > 0.0)) b = 1e-12;  // |N(0,1)| can round to zero
    std::snprintf(id, sizeof(id), "t%08lld", static_cast<long long>(i));
    Risk r;
    r.id = id;
    r.tiv = b;
    r.n_sub = 1;
    data.portfolio.index.emplace(r.id, data.portfolio.risks.size());
    data.portfolio.risks.push_back(std::move(r));

    EventRow row;
    row.year = 1;
    row.event = 1;
    row.risk = static_cast<std::uint32_t>(i);
    row.p = p;
    row.alpha = k_toy_alpha;
    row.beta = k_toy_beta;
    data.events.rows.push_back(row);
  }
  return data;
}

Dataset bootstrap_scale(const Portfolio& portfolio, const EventTable& events, int factor,
                        std::uint64_t seed) {
  if (factor < 1) throw ValidationError("bootstrap_scale: factor must be >= 1");

  // Strata of equal subrisk count, resampled independently: the subrisk total
  // scales exactly by `factor` while the risk composition stays random.
  std::map<std::int64_t, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < portfolio.risks.size(); ++i)
    strata[portfolio.risks[i].n_sub].push_back(i);

  // rows per source risk, for event duplication
  std::vector<std::vector<std::size_t>> rows_of(portfolio.risks.size());
  for (std::size_t j = 0; j < events.rows.size(); ++j)
    rows_of[events.rows[j].risk].push_back(j);

  Dataset out;
  out.portfolio.risks.reserve(portfolio.risks.size() * static_cast<std::size_t>(factor));
  Rng rng(seed, StreamPurpose::bootstrap);
  std::vector<std::size_t> sources;
  sources.reserve(portfolio.risks.size() * static_cast<std::size_t>(factor));
  for (const auto& [n_sub, members] : strata) {
    (void)n_sub;
    const std::size_t draws = members.size() * static_cast<std::size_t>(factor);
    for (std::size_t d = 0; d < draws; ++d)
      sources.push_back(members[rng.below(members.size())]);
  }

  for (std::size_t k = 0; k < sources.size(); ++k) {
    const Risk& src = portfolio.risks[sources[k]];
    Risk copy = src;
    copy.id = src.id + "." + std::to_string(k);
    out.portfolio.index.emplace(copy.id, out.portfolio.risks.size());
    out.portfolio.risks.push_back(std::move(copy));
  }
  for (std::size_t k = 0; k < sources.size(); ++k) {
    for (std::size_t j : rows_of[sources[k]]) {
      EventRow row = events.rows[j];
      row.risk = static_cast<std::uint32_t>(k);
      out.events.rows.push_back(row);
    }
  }
  return out;
}

}  // namespace losscap
