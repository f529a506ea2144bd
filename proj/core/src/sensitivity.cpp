#include "losscap/sensitivity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "losscap/errors.hpp"
#include "losscap/rng.hpp"
#include "losscap/sampler.hpp"

namespace losscap {

std::string to_string(ScenarioTag tag) {
  switch (tag) {
    case ScenarioTag::p0: return "P0";
    case ScenarioTag::p1: return "P1";
    case ScenarioTag::p2: return "P2";
    case ScenarioTag::p3: return "P3";
    case ScenarioTag::p4: return "P4";
  }
  return "?";
}

ScenarioTag scenario_from_string(const std::string& name) {
  std::string up = name;
  for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "P0") return ScenarioTag::p0;
  if (up == "P1") return ScenarioTag::p1;
  if (up == "P2") return ScenarioTag::p2;
  if (up == "P3") return ScenarioTag::p3;
  if (up == "P4") return ScenarioTag::p4;
  throw ConfigError("unknown scenario: " + name + " (expected P0..P4)");
}

double PerturbationScenario::default_delta(ScenarioTag tag) {
  return tag == ScenarioTag::p4 ? 0.25 : 0.05;
}

EventTable perturb(const EventTable& events, const PerturbationScenario& scenario,
                   int replicate_index) {
  if (scenario.tag == ScenarioTag::p0) return events;
  if (!(scenario.delta >= 0.0 && scenario.delta <= 1.0))
    throw ValidationError("perturb: delta must be in [0, 1]");

  EventTable out;
  out.rows.reserve(events.rows.size());
  const double delta = scenario.delta;
  const bool random = scenario.random();
  const double fixed_sign = scenario.tag == ScenarioTag::p2 ? -1.0 : 1.0;

  for (std::size_t i = 0; i < events.rows.size(); ++i) {
    EventRow row = events.rows[i];
    const double ab = row.alpha + row.beta;
    const double mu = row.alpha / ab;
    if (!(mu < 0.95))
      throw ValidationError("perturb: event row " + std::to_string(i + 1) +
                            " has expected damage ratio " + std::to_string(mu) +
                            " >= 0.95");
    double sign = fixed_sign;
    if (random) {
      Rng coin(scenario.seed, StreamPurpose::perturbation_coin,
               static_cast<std::uint64_t>(replicate_index), row.risk);
      sign = (coin.next_u64() & 1u) ? 1.0 : -1.0;
    }
    double mu_new;
    if ((1.0 + delta) * mu > 0.95) {
      if (random) {
        // coin picks the cap or its reflection about mu (mean preserving)
        mu_new = sign > 0 ? 0.95 : 2.0 * mu - 0.95;
      } else {
        mu_new = sign > 0 ? 0.95 : (1.0 - delta) * mu;
      }
    } else {
      mu_new = (1.0 + sign * delta) * mu;
    }
    row.alpha = mu_new * ab;
    row.beta = ab - row.alpha;  // keeps alpha+beta exact
    out.rows.push_back(row);
  }
  return out;
}

SensitivityRun run_sensitivity(const Portfolio& portfolio, const EventTable& events,
                               const PerturbationScenario& scenario, std::size_t m,
                               std::span<const int> ks, std::int32_t n_years,
                               std::uint64_t seed, int threads) {
  SensitivityRun run;
  run.ks.assign(ks.begin(), ks.end());
  const int r_count = scenario.random() ? scenario.replicates : 1;
  if (r_count < 1) throw ValidationError("run_sensitivity: replicates must be >= 1");

  run.pooled_lower.ks = run.pooled_upper.ks = run.ks;
  for (int r = 0; r < r_count; ++r) {
    EventTable perturbed = perturb(events, scenario, r);
    auto years = terms_by_year(portfolio, perturbed, n_years);
    auto summaries = summarize_years(years, /*max_kj=*/0, threads);
    ConservativeRun cons =
        run_conservative(summaries, m, BoundFamily::b2, SamplePath::sir, seed, threads,
                         static_cast<std::uint64_t>(r));
    run.min_ess_fraction = std::min(run.min_ess_fraction, cons.min_ess_fraction);
    run.lower.push_back(return_level_sample(cons.lower, ks));
    run.upper.push_back(return_level_sample(cons.upper, ks));
  }

  auto pool = [&](const std::vector<ReturnLevelSample>& parts, ReturnLevelSample& pooled) {
    pooled.n_replicates = 0;
    for (const auto& part : parts) pooled.n_replicates += part.n_replicates;
    pooled.q.reserve(pooled.n_replicates * run.ks.size());
    for (const auto& part : parts) pooled.q.insert(pooled.q.end(), part.q.begin(), part.q.end());
  };
  pool(run.lower, run.pooled_lower);
  pool(run.upper, run.pooled_upper);
  return run;
}

double variance_ratio(std::span<const std::vector<double>> replicate_samples) {
  const std::size_t r = replicate_samples.size();
  if (r < 2) throw ValidationError("variance_ratio: need at least two replicates");

  double mean_of_means = 0.0;
  double within_sum = 0.0;
  double mean_size = 0.0;
  std::vector<double> means(r);
  for (std::size_t i = 0; i < r; ++i) {
    const auto& sample = replicate_samples[i];
    if (sample.size() < 2) throw ValidationError("variance_ratio: replicate samples need size >= 2");
    double mu = 0;
    for (double x : sample) mu += x;
    mu /= static_cast<double>(sample.size());
    double ss = 0;
    for (double x : sample) ss += (x - mu) * (x - mu);
    means[i] = mu;
    mean_of_means += mu;
    within_sum += ss / static_cast<double>(sample.size() - 1);
    mean_size += static_cast<double>(sample.size());
  }
  mean_of_means /= static_cast<double>(r);
  mean_size /= static_cast<double>(r);
  const double sigma2_w = within_sum / static_cast<double>(r);

  double between_raw = 0;
  for (double mu : means) between_raw += (mu - mean_of_means) * (mu - mean_of_means);
  between_raw /= static_cast<double>(r - 1);
  // the replicate means carry sigma2_w/M of simulation noise; remove it
  const double sigma2_b = std::max(0.0, between_raw - sigma2_w / mean_size);

  if (!(sigma2_w > 0.0)) return sigma2_b > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return sigma2_b / sigma2_w;
}

double variance_ratio(const SensitivityRun& run, int k, bool upper_side) {
  const auto& parts = upper_side ? run.upper : run.lower;
  auto it = std::find(run.ks.begin(), run.ks.end(), k);
  if (it == run.ks.end())
    throw ValidationError("variance_ratio: k = " + std::to_string(k) + " was not configured");
  const std::size_t ki = static_cast<std::size_t>(it - run.ks.begin());
  std::vector<std::vector<double>> samples;
  samples.reserve(parts.size());
  for (const auto& part : parts) {
    std::vector<double> column(part.n_replicates);
    for (std::size_t mrep = 0; mrep < part.n_replicates; ++mrep) column[mrep] = part.at(mrep, ki);
    samples.push_back(std::move(column));
  }
  return variance_ratio(samples);
}

}  // namespace losscap
