#pragma once

// Portfolio and event-loss data model.
//
// A portfolio is a list of risks (id, total insured value, subrisk count);
// the event table holds one row per (year, event, risk) with a flooding
// probability p and Beta(alpha, beta) damage-ratio parameters. Each row
// expands to n_sub iid subrisk summands with exposure tiv/n_sub: the subrisk
// loss is 0 with probability 1-p and exposure * Beta(alpha, beta) otherwise.
//
// year_summary turns the rows of one year into the SummandStats that the
// bounds kernel consumes, for both tails (lower-tail statistics come from
// applying the same construction to -S, i.e. with the summand support bound
// c_i replaced by the centred mean exposure*p*mu).

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "losscap/bounds.hpp"

namespace losscap {

struct Risk {
  std::string id;
  double tiv = 0;            // total insured value b_r
  std::int64_t n_sub = 1;    // subrisk count
};

struct Portfolio {
  std::vector<Risk> risks;
  std::unordered_map<std::string, std::size_t> index;  // id -> position

  std::size_t require(const std::string& id, const std::string& context) const;
  std::int64_t total_subrisks() const;
};

struct EventRow {
  std::int32_t year = 0;
  std::int32_t event = 0;
  std::uint32_t risk = 0;  // index into Portfolio::risks
  double p = 0;
  double alpha = 0;
  double beta = 0;
};

struct EventTable {
  std::vector<EventRow> rows;
  std::int32_t max_year() const;
};

// One (year, event, risk) term of the loss sum, expanded view.
struct LossTerm {
  double p = 0;
  double alpha = 0;
  double beta = 0;
  double exposure = 0;       // tiv / n_sub
  std::int64_t n_sub = 1;
};

struct TermMoments {
  double mean = 0;       // per-subrisk expected loss: exposure * p * mu
  double variance = 0;   // per-subrisk loss variance
  double c_upper = 0;    // upper support of the centred summand
  double c_lower = 0;    // upper support of the negated summand
  double a_lower = 0;    // lower support of the centred summand (= -c_lower)
};

TermMoments term_moments(const LossTerm& term);

struct YearDescriptives {
  std::int64_t n_events = 0;   // distinct events in the year
  std::int64_t n_p_gt0 = 0;    // (subrisk, event) combinations with p > 0
  double p_bar = 0;            // mean flooding probability over that set
  double mu_bar = 0;           // mean expected damage ratio over that set
};

struct YearSummary {
  std::int32_t year = 0;
  std::int64_t n = 0;          // centred summand count (p > 0 only)
  double expected_total = 0;   // E of the uncentred yearly total
  SummandStats upper;
  SummandStats lower;
  YearDescriptives descriptive;

  bool degenerate() const { return n == 0 || !(upper.vbar > 0); }
};

// Aggregates one year's terms. Terms with p = 0 contribute nothing. max_kj
// is the largest j for which K_j is computed (0 disables the Kj vector).
YearSummary year_summary(std::int32_t year, std::span<const LossTerm> terms, int max_kj = 5);

struct YearTerms {
  std::int32_t year = 0;
  std::int64_t n_events = 0;  // distinct event ids among the year's rows
  std::vector<LossTerm> terms;
};

// Groups the event table into per-year term lists covering years
// 1..n_years; n_years = 0 means "up to the largest year present". Years with
// no rows are included with empty term lists (their loss is identically 0).
std::vector<YearTerms> terms_by_year(const Portfolio& portfolio, const EventTable& events,
                                     std::int32_t n_years = 0);

std::vector<YearSummary> summarize_years(const std::vector<YearTerms>& years, int max_kj = 5,
                                         int threads = 1);

// portfolio.csv: header risk_id,total_insured_value,n_subrisks
Portfolio load_portfolio(const std::filesystem::path& path);
void save_portfolio(const std::filesystem::path& path, const Portfolio& portfolio);

// events.csv: header year,event,risk_id,p,alpha,beta
EventTable load_events(const std::filesystem::path& path, const Portfolio& portfolio);
void save_events(const std::filesystem::path& path, const Portfolio& portfolio,
                 const EventTable& events);

// Toy scenarios: n single-subrisk risks in one year, loss b_i * Bernoulli(p_i).
//   i   : b ~ half-normal,  p ~ Beta(1,10)
//   ii  : b ~ Exp(1),       p ~ Beta(1,10)
//   iii : b ~ Pareto(4),    p ~ Beta(1,10)
//   iv  : b ~ Exp(1),       p ~ Unif(0,1)
// The damage ratio is identically 1, encoded as a degenerate Beta.
enum class ToyTag { i, ii, iii, iv };
std::string to_string(ToyTag tag);
ToyTag toy_tag_from_string(const std::string& name);

struct ToyScenario {
  ToyTag tag = ToyTag::i;
  std::int64_t n = 100000;
  std::uint64_t seed = 0;
};

struct Dataset {
  Portfolio portfolio;
  EventTable events;
};

Dataset generate_toy(const ToyScenario& scenario);

// Scales the dataset to factor x the risks and exactly factor x the
// subrisks: risks are resampled with replacement within strata of equal
// subrisk count, and each risk copy inherits every event row of its source.
Dataset bootstrap_scale(const Portfolio& portfolio, const EventTable& events, int factor,
                        std::uint64_t seed);

}  // namespace losscap
