#pragma once

// Deterministic synthetic portfolios for tests. Subrisk counts are
// log-uniform in [1, 50]; expected damage ratios stay well below the 0.95
// cap so deterministic perturbations scale means exactly.

#include <cstdint>
#include <filesystem>

#include "losscap/bounds.hpp"
#include "losscap/portfolio.hpp"

namespace fixtures {

struct FixtureSpec {
  std::size_t n_risks = 100;
  std::int32_t n_years = 20;
  int events_per_year = 5;      // mean; varies per year
  int risks_per_event = 30;     // mean; varies per event
  std::uint64_t seed = 1;
};

losscap::Dataset make_portfolio(const FixtureSpec& spec);

// Random SummandStats obeying 0 <= K1 <= K(1 - K/vbar) <= K <= vbar, c* > 0.
losscap::SummandStats random_stats(std::uint64_t seed, std::uint64_t index);

// Scratch directory under the system temp dir; removed and recreated.
std::filesystem::path fresh_dir(const std::string& name);

}  // namespace fixtures
