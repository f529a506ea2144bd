#include "fixtures.hpp"

#include <cmath>
#include <cstdio>

#include "losscap/rng.hpp"

namespace fixtures {

using losscap::Dataset;
using losscap::EventRow;
using losscap::Risk;
using losscap::Rng;
using losscap::StreamPurpose;
using losscap::SummandStats;

Dataset make_portfolio(const FixtureSpec& spec) {
  Dataset data;
  Rng rng(spec.seed, StreamPurpose::testing, 0xF1C5u);
  char id[24];
  data.portfolio.risks.reserve(spec.n_risks);
  for (std::size_t i = 0; i < spec.n_risks; ++i) {
    std::snprintf(id, sizeof(id), "r%07zu", i);
    Risk r;
    r.id = id;
    r.tiv = 1.5e4 * std::exp(rng.uniform() * std::log(4e5 / 1.5e4));
    r.n_sub = static_cast<std::int64_t>(std::floor(std::exp(rng.uniform() * std::log(50.0))));
    if (r.n_sub < 1) r.n_sub = 1;
    data.portfolio.index.emplace(r.id, data.portfolio.risks.size());
    data.portfolio.risks.push_back(std::move(r));
  }
  for (std::int32_t year = 1; year <= spec.n_years; ++year) {
    const int n_events =
        1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * spec.events_per_year)));
    for (int event = 1; event <= n_events; ++event) {
      const int hits =
          1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * spec.risks_per_event)));
      for (int h = 0; h < hits; ++h) {
        EventRow row;
        row.year = year;
        row.event = event;
        row.risk = static_cast<std::uint32_t>(rng.below(spec.n_risks));
        // mostly small flooding probabilities, occasional large ones
        const double u = rng.uniform_pos();
        row.p = 0.002 + 0.6 * u * u;
        const double mu = 0.03 + 0.55 * rng.uniform();
        const double conc = 4.0 + 36.0 * rng.uniform();
        row.alpha = mu * conc;
        row.beta = conc - row.alpha;
        data.events.rows.push_back(row);
      }
    }
  }
  return data;
}

SummandStats random_stats(std::uint64_t seed, std::uint64_t index) {
  Rng rng(seed, StreamPurpose::testing, 0x57A7u, index);
  SummandStats s;
  s.n = 1.0 + std::floor(rng.uniform() * 1e6);
  s.vbar = std::exp(rng.uniform() * 8.0 - 4.0);
  s.cstar = std::exp(rng.uniform() * 8.0 - 3.0);
  const double k_frac = rng.uniform();
  s.K = s.vbar * k_frac;
  // feasible K1 never exceeds K (1 - K/vbar) (Cauchy-Schwarz on the c_i)
  s.K1 = s.K * (1.0 - k_frac) * rng.uniform();
  s.mean_sq_range = s.cstar * s.cstar * (1.0 + rng.uniform());
  return s;
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("losscap_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
