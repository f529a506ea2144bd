#include "losscap/returns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "losscap/csv.hpp"
#include "losscap/errors.hpp"
#include "losscap/rng.hpp"

namespace losscap {

double return_level(std::span<const double> yearly_totals, int k) {
  const std::size_t n = yearly_totals.size();
  if (k < 2) throw ValidationError("return_level: k must be >= 2");
  if (static_cast<std::size_t>(k) > n)
    throw ValidationError("return_level: k = " + std::to_string(k) + " exceeds the " +
                          std::to_string(n) + " simulated years");
  // ceil(n/k)-th largest
  const std::size_t rank = (n + static_cast<std::size_t>(k) - 1) / static_cast<std::size_t>(k);
  std::vector<double> v(yearly_totals.begin(), yearly_totals.end());
  std::nth_element(v.begin(), v.begin() + (rank - 1), v.end(), std::greater<double>());
  return v[rank - 1];
}

ReturnLevelSample return_level_sample(const ReplicateMatrix& matrix, std::span<const int> ks) {
  ReturnLevelSample out;
  out.ks.assign(ks.begin(), ks.end());
  out.n_replicates = matrix.n_replicates;
  out.q.resize(matrix.n_replicates * ks.size());
  const std::size_t n = matrix.years.size();
  std::vector<double> row(n);
  for (std::size_t m = 0; m < matrix.n_replicates; ++m) {
    auto src = matrix.row(m);
    row.assign(src.begin(), src.end());
    std::sort(row.begin(), row.end(), std::greater<double>());
    for (std::size_t ki = 0; ki < out.ks.size(); ++ki) {
      const int k = out.ks[ki];
      if (k < 2) throw ValidationError("return_level_sample: k must be >= 2");
      if (static_cast<std::size_t>(k) > n)
        throw ValidationError("return_level_sample: k = " + std::to_string(k) +
                              " exceeds the " + std::to_string(n) + " simulated years");
      const std::size_t rank = (n + static_cast<std::size_t>(k) - 1) / static_cast<std::size_t>(k);
      out.q[m * out.ks.size() + ki] = row[rank - 1];
    }
  }
  return out;
}

double quantile_type1(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ValidationError("quantile_type1: empty sample");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const std::size_t n = sorted.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  return sorted[rank - 1];
}

namespace {

double mean_of(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<double> column_of(const ReturnLevelSample& sample, std::size_t ki) {
  std::vector<double> out(sample.n_replicates);
  for (std::size_t m = 0; m < sample.n_replicates; ++m) out[m] = sample.at(m, ki);
  return out;
}

}  // namespace

ReturnLevelReport aggregate(const ReturnLevelSample& lower, const ReturnLevelSample& upper) {
  if (lower.ks != upper.ks)
    throw ValidationError("aggregate: lower and upper samples disagree on k values");
  if (lower.n_replicates != upper.n_replicates)
    throw ValidationError("aggregate: lower and upper samples disagree on replicate count");
  ReturnLevelReport report;
  report.n_replicates = lower.n_replicates;
  report.few_replicates = lower.n_replicates < 40;
  for (std::size_t ki = 0; ki < lower.ks.size(); ++ki) {
    ReturnLevelRow row;
    row.k = lower.ks[ki];
    auto qlo = column_of(lower, ki);
    auto qhi = column_of(upper, ki);
    row.point_lower = mean_of(qlo);
    row.point_upper = mean_of(qhi);
    std::sort(qlo.begin(), qlo.end());
    std::sort(qhi.begin(), qhi.end());
    row.pi_low = quantile_type1(qlo, 0.025);
    row.pi_high = quantile_type1(qhi, 0.975);
    report.rows.push_back(row);
  }
  return report;
}

ReturnLevelReport aggregate(const ReplicateMatrix& lower, const ReplicateMatrix& upper,
                            std::span<const int> ks) {
  return aggregate(return_level_sample(lower, ks), return_level_sample(upper, ks));
}

void attach_baseline(ReturnLevelReport& report, const ReturnLevelSample& lower,
                     const ReturnLevelSample& upper, const ReturnLevelSample& baseline,
                     std::size_t bootstrap_b, std::uint64_t seed) {
  if (baseline.ks != lower.ks)
    throw ValidationError("attach_baseline: baseline computed for different k values");
  for (std::size_t ki = 0; ki < report.rows.size(); ++ki) {
    ReturnLevelRow& row = report.rows[ki];
    auto qb = column_of(baseline, ki);
    row.baseline_point = mean_of(qb);
    std::sort(qb.begin(), qb.end());
    row.baseline_lo = quantile_type1(qb, 0.025);
    row.baseline_hi = quantile_type1(qb, 0.975);
    const double base_width = *row.baseline_hi - *row.baseline_lo;
    if (!(base_width > 0.0))
      throw ValidationError("attach_baseline: baseline interval width is zero at k = " +
                            std::to_string(row.k));
    row.width_ratio = (row.pi_high - row.pi_low) / base_width;

    if (bootstrap_b > 0) {
      // Replicate q-vectors are resampled as units: when the runs share M the
      // same index draw covers (q-, q+, q_base); otherwise the baseline is
      // resampled on its own index set.
      Rng rng(seed, StreamPurpose::width_bootstrap, static_cast<std::uint64_t>(row.k));
      const std::size_t mc = lower.n_replicates;
      const std::size_t mb = baseline.n_replicates;
      const bool joint = mb == mc;
      std::vector<double> ratios(bootstrap_b);
      std::vector<double> rlo(mc), rhi(mc), rb(mb);
      for (std::size_t b = 0; b < bootstrap_b; ++b) {
        for (std::size_t i = 0; i < mc; ++i) {
          const std::size_t j = rng.below(mc);
          rlo[i] = lower.at(j, ki);
          rhi[i] = upper.at(j, ki);
          if (joint) rb[i] = baseline.at(j, ki);
        }
        if (!joint)
          for (std::size_t i = 0; i < mb; ++i) rb[i] = baseline.at(rng.below(mb), ki);
        std::sort(rlo.begin(), rlo.end());
        std::sort(rhi.begin(), rhi.end());
        std::sort(rb.begin(), rb.end());
        const double cons = quantile_type1(rhi, 0.975) - quantile_type1(rlo, 0.025);
        const double base = quantile_type1(rb, 0.975) - quantile_type1(rb, 0.025);
        ratios[b] = base > 0.0 ? cons / base : std::numeric_limits<double>::quiet_NaN();
      }
      double sum = 0, count = 0;
      for (double r : ratios)
        if (std::isfinite(r)) {
          sum += r;
          count += 1;
        }
      const double meanr = count > 0 ? sum / count : 0.0;
      double ss = 0;
      for (double r : ratios)
        if (std::isfinite(r)) ss += (r - meanr) * (r - meanr);
      row.width_ratio_se = count > 1 ? std::sqrt(ss / (count - 1)) : 0.0;
    }
  }
}

void write_report_csv(const std::filesystem::path& path, const ReturnLevelReport& report) {
  auto out = open_output(path);
  out << "k,point_lower,point_upper,pi_low,pi_high,baseline_point,baseline_lo,baseline_hi,"
         "width_ratio,width_ratio_se\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& row : report.rows) {
    out << row.k << ',' << format_double(row.point_lower) << ',' << format_double(row.point_upper)
        << ',' << format_double(row.pi_low) << ',' << format_double(row.pi_high) << ','
        << opt(row.baseline_point) << ',' << opt(row.baseline_lo) << ',' << opt(row.baseline_hi)
        << ',' << opt(row.width_ratio) << ',' << opt(row.width_ratio_se) << '\n';
  }
}

}  // namespace losscap
