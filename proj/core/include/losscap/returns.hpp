#pragma once

// Return-level estimation from replicate matrices: per-replicate order
// statistics, point estimates, conservative 95% prediction intervals, and
// relative interval widths against a baseline.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "losscap/mc.hpp"

namespace losscap {

// The k-year return level of one replicate: the ceil(n_y/k)-th largest of
// the yearly totals. Requires 2 <= k <= n_y.
double return_level(std::span<const double> yearly_totals, int k);

// M simulated return levels per configured k.
struct ReturnLevelSample {
  std::vector<int> ks;
  std::size_t n_replicates = 0;
  std::vector<double> q;  // row-major: replicate x ks

  double at(std::size_t m, std::size_t ki) const { return q[m * ks.size() + ki]; }
};

ReturnLevelSample return_level_sample(const ReplicateMatrix& matrix, std::span<const int> ks);

struct ReturnLevelRow {
  int k = 0;
  double point_lower = 0;  // mean of q_k^-
  double point_upper = 0;  // mean of q_k^+
  double pi_low = 0;       // 2.5% quantile of q_k^-
  double pi_high = 0;      // 97.5% quantile of q_k^+
  std::optional<double> baseline_point;
  std::optional<double> baseline_lo;
  std::optional<double> baseline_hi;
  std::optional<double> width_ratio;
  std::optional<double> width_ratio_se;
};

struct ReturnLevelReport {
  std::vector<ReturnLevelRow> rows;
  std::size_t n_replicates = 0;
  bool few_replicates = false;  // M < 40: tail quantiles are noisy
};

// Type-1 (inverse empirical cdf) quantile of a sorted ascending sample.
double quantile_type1(std::span<const double> sorted, double p);

ReturnLevelReport aggregate(const ReturnLevelSample& lower, const ReturnLevelSample& upper);
ReturnLevelReport aggregate(const ReplicateMatrix& lower, const ReplicateMatrix& upper,
                            std::span<const int> ks);

// Adds baseline columns and per-k width ratios
// (pi_high - pi_low) / (baseline 97.5% - 2.5% width), with bootstrap standard
// errors from resampling the replicate q-vectors B times.
void attach_baseline(ReturnLevelReport& report, const ReturnLevelSample& lower,
                     const ReturnLevelSample& upper, const ReturnLevelSample& baseline,
                     std::size_t bootstrap_b, std::uint64_t seed);

// CSV: k,point_lower,point_upper,pi_low,pi_high,baseline_point,baseline_lo,
// baseline_hi,width_ratio,width_ratio_se (baseline fields empty when absent).
void write_report_csv(const std::filesystem::path& path, const ReturnLevelReport& report);

}  // namespace losscap
