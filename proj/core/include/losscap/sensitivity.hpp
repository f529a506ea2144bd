#pragma once

// Damage-ratio perturbation study. A scenario perturbs the expected damage
// ratio mu = alpha/(alpha+beta) of every event row while keeping alpha+beta
// fixed:
//
//   P1: mu' = (1+delta) mu for all risks
//   P2: mu' = (1-delta) mu for all risks
//   P3: fair coin per risk, mu' = (1 +/- delta) mu,  delta = 0.05
//   P4: same with delta = 0.25
//
// Whenever (1+delta) mu > 0.95: deterministic scenarios cap mu' at 0.95;
// random scenarios use the coin to pick 0.95 or the reflection 2 mu - 0.95,
// which keeps the perturbation mean-preserving. The coin is flipped once per
// (risk, portfolio replicate): every event row of a risk shares the sign.

#include <cstdint>
#include <span>
#include <vector>

#include "losscap/portfolio.hpp"
#include "losscap/returns.hpp"

namespace losscap {

enum class ScenarioTag { p0, p1, p2, p3, p4 };

std::string to_string(ScenarioTag tag);
ScenarioTag scenario_from_string(const std::string& name);

struct PerturbationScenario {
  ScenarioTag tag = ScenarioTag::p0;
  double delta = 0.05;      // 0.25 for P4 by convention; configurable
  int replicates = 100;     // R, used by P3/P4 only
  std::uint64_t seed = 0;   // drives the per-risk coins

  bool random() const { return tag == ScenarioTag::p3 || tag == ScenarioTag::p4; }
  // The delta the tag implies when the caller does not override it.
  static double default_delta(ScenarioTag tag);
};

// Applies the scenario to every event row. replicate_index selects the coin
// set for random scenarios. Validates mu < 0.95 on input, naming the
// offending row. P0 returns an unchanged copy.
EventTable perturb(const EventTable& events, const PerturbationScenario& scenario,
                   int replicate_index = 0);

struct SensitivityRun {
  std::vector<int> ks;
  // One entry per portfolio replicate (size 1 for P0/P1/P2, R for P3/P4).
  std::vector<ReturnLevelSample> lower;
  std::vector<ReturnLevelSample> upper;
  // All R x M simulated return levels pooled, per side.
  ReturnLevelSample pooled_lower;
  ReturnLevelSample pooled_upper;
  double min_ess_fraction = 1.0;
};

// SIR path with B2 throughout (this is the study the speed-up enables).
SensitivityRun run_sensitivity(const Portfolio& portfolio, const EventTable& events,
                               const PerturbationScenario& scenario, std::size_t m,
                               std::span<const int> ks, std::int32_t n_years,
                               std::uint64_t seed, int threads = 0);

// One-way variance decomposition of R replicate samples (same k, same side):
// sigma2_b = variance of the replicate means, bias-corrected by sigma2_w/M
// and floored at 0; sigma2_w = mean within-replicate variance. Returns
// sigma2_b / sigma2_w.
double variance_ratio(std::span<const std::vector<double>> replicate_samples);

// Convenience: the ratio for one (k, side) of a SensitivityRun.
double variance_ratio(const SensitivityRun& run, int k, bool upper_side);

}  // namespace losscap
