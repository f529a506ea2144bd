#include "app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "losscap/bounds.hpp"
#include "losscap/csv.hpp"
#include "losscap/errors.hpp"
#include "losscap/mc.hpp"
#include "losscap/parallel.hpp"
#include "losscap/portfolio.hpp"
#include "losscap/returns.hpp"
#include "losscap/rng.hpp"
#include "losscap/sampler.hpp"
#include "losscap/sensitivity.hpp"
#include "losscap/version.hpp"

namespace losscap_cli {

namespace fs = std::filesystem;
using namespace losscap;

namespace {

int default_threads() {
  if (const char* env = std::getenv("LOSSCAP_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;  // resolve_threads picks hardware concurrency
}

std::vector<int> parse_ks(const std::string& spec) {
  std::vector<int> ks;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t comma = spec.find(',', start);
    if (comma == std::string::npos) comma = spec.size();
    const std::string field = spec.substr(start, comma - start);
    if (!field.empty()) ks.push_back(static_cast<int>(parse_int(field, "--ks")));
    start = comma + 1;
  }
  if (ks.empty()) throw ValidationError("--ks: no return periods given");
  for (int k : ks)
    if (k < 2) throw ValidationError("--ks: return periods must be >= 2");
  return ks;
}

fs::path ensure_outdir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory " + dir.string());
  return dir;
}

// Config echo: rerunning `losscap --config <out>/manifest.cfg <cmd>`
// reproduces the outputs byte for byte.
void write_manifest(const CLI::App* sub, const fs::path& outdir) {
  auto out = open_output(outdir / "manifest.cfg");
  out << "# losscap " << k_version << " manifest\n";
  out << "# rerun: losscap --config " << (outdir / "manifest.cfg").string() << ' '
      << sub->get_name() << "\n";
  out << '[' << sub->get_name() << "]\n";
  out << sub->config_to_str(true, false);
}

struct LoadedData {
  Portfolio portfolio;
  EventTable events;
  std::vector<YearTerms> years;
};

LoadedData load_data(const std::string& portfolio_path, const std::string& events_path,
                     int n_years) {
  LoadedData data;
  data.portfolio = load_portfolio(portfolio_path);
  data.events = load_events(events_path, data.portfolio);
  data.years = terms_by_year(data.portfolio, data.events, n_years);
  return data;
}

void write_report_json(const fs::path& path, const ReturnLevelReport& report) {
  nlohmann::ordered_json doc;
  doc["replicates"] = report.n_replicates;
  doc["few_replicates"] = report.few_replicates;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json r;
    r["k"] = row.k;
    r["point_lower"] = row.point_lower;
    r["point_upper"] = row.point_upper;
    r["pi_low"] = row.pi_low;
    r["pi_high"] = row.pi_high;
    if (row.baseline_point) {
      r["baseline_point"] = *row.baseline_point;
      r["baseline_lo"] = *row.baseline_lo;
      r["baseline_hi"] = *row.baseline_hi;
      r["width_ratio"] = *row.width_ratio;
      if (row.width_ratio_se) r["width_ratio_se"] = *row.width_ratio_se;
    }
    doc["rows"].push_back(std::move(r));
  }
  auto out = open_output(path);
  out << doc.dump(2) << "\n";
}

// --- summarize ---------------------------------------------------------

struct SummarizeConfig {
  std::string portfolio, events, out;
  int n_years = 0;
  int threads = default_threads();
};

void cmd_summarize(const SummarizeConfig& cfg, const CLI::App* sub) {
  auto data = load_data(cfg.portfolio, cfg.events, cfg.n_years);
  auto summaries = summarize_years(data.years, 5, cfg.threads);

  // quartile flags on expected losses; ties broken by year index
  std::vector<char> flag(summaries.size(), ' ');
  if (!summaries.empty()) {
    std::vector<double> losses(summaries.size());
    for (std::size_t i = 0; i < summaries.size(); ++i) losses[i] = summaries[i].expected_total;
    std::vector<double> sorted = losses;
    std::sort(sorted.begin(), sorted.end());
    auto flag_year = [&](double value, char mark) {
      for (std::size_t i = 0; i < losses.size(); ++i) {
        if (losses[i] == value && flag[i] == ' ') {
          flag[i] = mark;
          return;
        }
      }
    };
    flag_year(quantile_type1(sorted, 0.25), 'A');
    flag_year(quantile_type1(sorted, 0.50), 'B');
    flag_year(quantile_type1(sorted, 0.75), 'C');
    flag_year(sorted.back(), 'D');
  }

  std::printf("%6s %8s %16s %10s %8s %8s %s\n", "year", "n_ev", "E[S]", "n_p>0", "p_bar",
              "mu_bar", "flag");
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    std::printf("%6d %8lld %16.6g %10lld %8.4f %8.4f %c\n", s.year,
                static_cast<long long>(s.descriptive.n_events), s.expected_total,
                static_cast<long long>(s.descriptive.n_p_gt0), s.descriptive.p_bar,
                s.descriptive.mu_bar, flag[i]);
  }

  if (!cfg.out.empty()) {
    const fs::path dir = ensure_outdir(cfg.out);
    auto out = open_output(dir / "year_summaries.csv");
    out << "year,n_events,expected_loss,n_p_gt0,p_bar,mu_bar,flag\n";
    for (std::size_t i = 0; i < summaries.size(); ++i) {
      const auto& s = summaries[i];
      out << s.year << ',' << s.descriptive.n_events << ',' << format_double(s.expected_total)
          << ',' << s.descriptive.n_p_gt0 << ',' << format_double(s.descriptive.p_bar) << ','
          << format_double(s.descriptive.mu_bar) << ',' << (flag[i] == ' ' ? "" : std::string(1, flag[i]))
          << '\n';
    }
    out.close();
    write_manifest(sub, dir);
  }
}

// --- toy-gen / bootstrap ----------------------------------------------

struct ToyGenConfig {
  std::string scenario = "ii";
  std::int64_t n = 100000;
  std::uint64_t seed = 0;
  std::string out;
};

void cmd_toy_gen(const ToyGenConfig& cfg, const CLI::App* sub) {
  ToyScenario scenario{toy_tag_from_string(cfg.scenario), cfg.n, cfg.seed};
  Dataset data = generate_toy(scenario);
  const fs::path dir = ensure_outdir(cfg.out);
  save_portfolio(dir / "portfolio.csv", data.portfolio);
  save_events(dir / "events.csv", data.portfolio, data.events);
  write_manifest(sub, dir);
  std::printf("toy scenario %s: %lld risks written to %s\n", cfg.scenario.c_str(),
              static_cast<long long>(cfg.n), dir.string().c_str());
}

struct BootstrapConfig {
  std::string portfolio, events, out;
  int factor = 10;
  std::uint64_t seed = 0;
};

void cmd_bootstrap(const BootstrapConfig& cfg, const CLI::App* sub) {
  Portfolio pf = load_portfolio(cfg.portfolio);
  EventTable events = load_events(cfg.events, pf);
  Dataset scaled = bootstrap_scale(pf, events, cfg.factor, cfg.seed);
  const fs::path dir = ensure_outdir(cfg.out);
  save_portfolio(dir / "portfolio.csv", scaled.portfolio);
  save_events(dir / "events.csv", scaled.portfolio, scaled.events);
  write_manifest(sub, dir);
  std::printf("bootstrap x%d: %zu risks, %lld subrisks, %zu event rows\n", cfg.factor,
              scaled.portfolio.risks.size(),
              static_cast<long long>(scaled.portfolio.total_subrisks()),
              scaled.events.rows.size());
}

// --- bounds-curve ------------------------------------------------------

struct CurveConfig {
  std::string portfolio, events, out;
  int n_years = 0;
  int year = 1;
  std::string tail = "upper";
  std::string families = "Bennett,B1,B2,B3,Hoeffding,Bernstein,CLT-approx";
  double tmin = 0.0;
  double tmax = 0.0;  // 0 = auto: solve B1(t) = -0.025
  int tcount = 101;
  int higher_j = 3;
  std::int64_t mc_band = 0;
  std::uint64_t seed = 0;
  int threads = default_threads();
};

double auto_tmax(const SummandStats& stats) {
  // range rule from the toy studies: stop where the tightest bound reaches
  // exp(n * -0.025) per summand
  const double target = -0.025;
  double hi = std::sqrt(stats.vbar);
  if (!(hi > 0)) throw ValidationError("bounds-curve: year has zero variance");
  int guard = 0;
  while (log_bound(BoundFamily::b1, hi, stats) > target) {
    hi *= 2.0;
    if (++guard > 200) throw NumericError("bounds-curve: auto t-max bracketing failed");
  }
  double lo = 0.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (log_bound(BoundFamily::b1, mid, stats) > target ? lo : hi) = mid;
  }
  return hi;
}

void cmd_bounds_curve(const CurveConfig& cfg, const CLI::App* sub) {
  if (cfg.mc_band > 0 && sub->count("--seed") == 0)
    throw ConfigError("bounds-curve: --seed is required when --mc-band is used");
  auto data = load_data(cfg.portfolio, cfg.events, cfg.n_years);
  if (cfg.year < 1 || static_cast<std::size_t>(cfg.year) > data.years.size())
    throw ValidationError("bounds-curve: year " + std::to_string(cfg.year) + " not in 1.." +
                          std::to_string(data.years.size()));
  const bool upper = cfg.tail == "upper";
  if (!upper && cfg.tail != "lower")
    throw ConfigError("bounds-curve: --tail must be 'upper' or 'lower'");

  YearSummary summary = year_summary(cfg.year, data.years[cfg.year - 1].terms, cfg.higher_j + 1);
  if (summary.degenerate())
    throw ValidationError("bounds-curve: year " + std::to_string(cfg.year) + " is degenerate");
  const SummandStats& stats = upper ? summary.upper : summary.lower;

  std::vector<BoundFamily> families;
  {
    std::size_t start = 0;
    const std::string& f = cfg.families;
    while (start <= f.size()) {
      std::size_t comma = f.find(',', start);
      if (comma == std::string::npos) comma = f.size();
      const std::string name = f.substr(start, comma - start);
      if (!name.empty()) families.push_back(family_from_string(name));
      start = comma + 1;
    }
  }
  if (families.empty()) throw ConfigError("bounds-curve: no families requested");

  const double tmax = cfg.tmax > 0 ? cfg.tmax : auto_tmax(stats);
  if (!(cfg.tmin >= 0) || cfg.tmin >= tmax)
    throw ValidationError("bounds-curve: need 0 <= tmin < tmax");
  if (cfg.tcount < 2) throw ValidationError("bounds-curve: tcount must be >= 2");

  const fs::path dir = ensure_outdir(cfg.out);
  auto out = open_output(dir / "curve.csv");
  out << "t,family,log_prob_bound\n";
  for (int i = 0; i < cfg.tcount; ++i) {
    const double t = cfg.tmin + (tmax - cfg.tmin) * i / (cfg.tcount - 1);
    for (BoundFamily family : families) {
      const double value = log_bound(family, t, stats, cfg.higher_j);
      out << format_double(t) << ',' << to_string(family) << ',' << format_double(value) << '\n';
    }
  }

  if (cfg.mc_band > 0) {
    // 90% Wilson band on the per-summand log survival from a standard run
    const double n = stats.n;
    const double z = 1.6448536269514722;
    std::vector<double> centred(static_cast<std::size_t>(cfg.mc_band));
    parallel_for(centred.size(), cfg.threads, [&](std::size_t i) {
      Rng rng(cfg.seed, StreamPurpose::mc_band, static_cast<std::uint64_t>(cfg.year), i);
      const double total = simulate_year_standard(data.years[cfg.year - 1].terms, rng);
      centred[i] = upper ? total - summary.expected_total : summary.expected_total - total;
    });
    std::sort(centred.begin(), centred.end());
    const double nn = static_cast<double>(centred.size());
    for (int i = 0; i < cfg.tcount; ++i) {
      const double t = cfg.tmin + (tmax - cfg.tmin) * i / (cfg.tcount - 1);
      const auto it = std::lower_bound(centred.begin(), centred.end(), n * t);
      const double count = static_cast<double>(centred.end() - it);
      const double phat = count / nn;
      const double denom = 1.0 + z * z / nn;
      const double centre = phat + z * z / (2.0 * nn);
      const double spread = z * std::sqrt(phat * (1.0 - phat) / nn + z * z / (4.0 * nn * nn));
      const double lo = (centre - spread) / denom;
      const double hi = (centre + spread) / denom;
      if (lo > 0.0)
        out << format_double(t) << ",mc-lo90," << format_double(std::log(lo) / n) << '\n';
      if (hi > 0.0)
        out << format_double(t) << ",mc-hi90," << format_double(std::log(hi) / n) << '\n';
    }
  }
  out.close();
  write_manifest(sub, dir);
  std::printf("curve written: %s (tmax = %g)\n", (dir / "curve.csv").string().c_str(), tmax);
}

// --- run / return-levels ------------------------------------------------

struct RunConfig {
  std::string portfolio, events, out;
  int n_years = 0;
  std::string method = "sir";
  std::string family = "B2";
  std::size_t m = 1000;
  std::uint64_t seed = 0;
  std::string ks = "2,5,10,20,50,100,200,500";
  bool with_baseline = false;
  std::size_t bootstrap_b = 200;
  bool binary = false;
  int threads = default_threads();
};

void cmd_run(const RunConfig& cfg, const CLI::App* sub) {
  auto data = load_data(cfg.portfolio, cfg.events, cfg.n_years);
  const auto ks = parse_ks(cfg.ks);
  const fs::path dir = ensure_outdir(cfg.out);

  ReturnLevelReport report;
  if (cfg.method == "standard") {
    ReplicateMatrix matrix = run_standard(data.years, cfg.m, cfg.seed, cfg.threads);
    write_matrix_csv(dir / "matrix_standard.csv", matrix);
    if (cfg.binary) write_matrix_binary(dir / "matrix_standard.bin", matrix);
    report = aggregate(matrix, matrix, ks);  // F- = F+ = the simulated totals
  } else if (cfg.method == "direct" || cfg.method == "sir") {
    const BoundFamily family = family_from_string(cfg.family);
    const SamplePath path = cfg.method == "sir" ? SamplePath::sir : SamplePath::direct;
    auto summaries = summarize_years(data.years, 0, cfg.threads);
    ConservativeRun cons =
        run_conservative(summaries, cfg.m, family, path, cfg.seed, cfg.threads);
    if (path == SamplePath::sir && cons.min_ess_fraction < 0.2)
      std::fprintf(stderr,
                   "warning: SIR effective sample size fell to %.1f%% of M in year %d\n",
                   100.0 * cons.min_ess_fraction, cons.min_ess_year);
    write_matrix_csv(dir / "matrix_fminus.csv", cons.lower);
    write_matrix_csv(dir / "matrix_fplus.csv", cons.upper);
    if (cfg.binary) {
      write_matrix_binary(dir / "matrix_fminus.bin", cons.lower);
      write_matrix_binary(dir / "matrix_fplus.bin", cons.upper);
    }
    auto lower_sample = return_level_sample(cons.lower, ks);
    auto upper_sample = return_level_sample(cons.upper, ks);
    report = aggregate(lower_sample, upper_sample);
    if (cfg.with_baseline) {
      ReplicateMatrix baseline = run_standard(data.years, cfg.m, cfg.seed, cfg.threads);
      write_matrix_csv(dir / "matrix_standard.csv", baseline);
      if (cfg.binary) write_matrix_binary(dir / "matrix_standard.bin", baseline);
      attach_baseline(report, lower_sample, upper_sample, return_level_sample(baseline, ks),
                      cfg.bootstrap_b, cfg.seed);
    }
  } else {
    throw ConfigError("run: --method must be standard, direct or sir");
  }

  if (report.few_replicates)
    std::fprintf(stderr, "warning: M = %zu < 40, the 2.5%%/97.5%% quantiles are noisy\n", cfg.m);
  write_report_csv(dir / "report.csv", report);
  write_report_json(dir / "report.json", report);
  write_manifest(sub, dir);
  std::printf("run complete: %s\n", dir.string().c_str());
}

struct ReturnLevelsConfig {
  std::string lower, upper, baseline, out;
  std::string ks = "2,5,10,20,50,100,200,500";
  std::size_t bootstrap_b = 200;
  std::uint64_t seed = 0;
};

void cmd_return_levels(const ReturnLevelsConfig& cfg, const CLI::App* sub) {
  const auto ks = parse_ks(cfg.ks);
  auto lower = return_level_sample(read_matrix(cfg.lower), ks);
  auto upper = return_level_sample(read_matrix(cfg.upper), ks);
  ReturnLevelReport report = aggregate(lower, upper);
  if (!cfg.baseline.empty()) {
    auto baseline = return_level_sample(read_matrix(cfg.baseline), ks);
    attach_baseline(report, lower, upper, baseline, cfg.bootstrap_b, cfg.seed);
  }
  const fs::path dir = ensure_outdir(cfg.out);
  write_report_csv(dir / "report.csv", report);
  write_report_json(dir / "report.json", report);
  write_manifest(sub, dir);
  std::printf("report written: %s\n", (dir / "report.csv").string().c_str());
}

// --- sensitivity ---------------------------------------------------------

struct SensitivityConfig {
  std::string portfolio, events, out;
  int n_years = 0;
  std::string scenario = "P3";
  double delta = 0.0;  // 0 = the scenario's conventional value
  int replicates = 100;
  std::size_t m = 1000;
  std::uint64_t seed = 0;
  std::string ks = "2,5,10,20,50,100,200";
  int boxplot_k = 0;  // 0 = largest configured k
  int threads = default_threads();
};

void cmd_sensitivity(const SensitivityConfig& cfg, const CLI::App* sub) {
  auto data = load_data(cfg.portfolio, cfg.events, cfg.n_years);
  const auto ks = parse_ks(cfg.ks);

  PerturbationScenario scenario;
  scenario.tag = scenario_from_string(cfg.scenario);
  scenario.delta = cfg.delta > 0 ? cfg.delta : PerturbationScenario::default_delta(scenario.tag);
  scenario.replicates = cfg.replicates;
  scenario.seed = cfg.seed;

  SensitivityRun run = run_sensitivity(data.portfolio, data.events, scenario, cfg.m, ks,
                                       cfg.n_years, cfg.seed, cfg.threads);
  if (run.min_ess_fraction < 0.2)
    std::fprintf(stderr, "warning: SIR effective sample size fell below 0.2 M\n");

  const fs::path dir = ensure_outdir(cfg.out);
  {
    auto out = open_output(dir / "quantiles.csv");
    out << "scenario,k,side,quantile,value\n";
    const double qs[] = {0.025, 0.5, 0.975};
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      for (bool upper_side : {false, true}) {
        const ReturnLevelSample& pooled = upper_side ? run.pooled_upper : run.pooled_lower;
        std::vector<double> column(pooled.n_replicates);
        for (std::size_t i = 0; i < pooled.n_replicates; ++i) column[i] = pooled.at(i, ki);
        std::sort(column.begin(), column.end());
        for (double q : qs) {
          out << to_string(scenario.tag) << ',' << ks[ki] << ','
              << (upper_side ? "upper" : "lower") << ',' << format_double(q) << ','
              << format_double(quantile_type1(column, q)) << '\n';
        }
      }
    }
  }
  {
    const int bk = cfg.boxplot_k > 0 ? cfg.boxplot_k : *std::max_element(ks.begin(), ks.end());
    const auto it = std::find(ks.begin(), ks.end(), bk);
    if (it == ks.end()) throw ConfigError("sensitivity: --boxplot-k must be one of --ks");
    const std::size_t ki = static_cast<std::size_t>(it - ks.begin());
    auto out = open_output(dir / ("boxplot_k" + std::to_string(bk) + ".csv"));
    out << "scenario,replicate,side,sample_value\n";
    for (std::size_t r = 0; r < run.lower.size(); ++r) {
      for (bool upper_side : {false, true}) {
        const ReturnLevelSample& part = upper_side ? run.upper[r] : run.lower[r];
        for (std::size_t i = 0; i < part.n_replicates; ++i)
          out << to_string(scenario.tag) << ',' << r << ',' << (upper_side ? "upper" : "lower")
              << ',' << format_double(part.at(i, ki)) << '\n';
      }
    }
  }
  if (run.lower.size() >= 2) {
    auto out = open_output(dir / "variance_ratios.csv");
    out << "scenario,k,side,ratio\n";
    for (int k : ks) {
      for (bool upper_side : {false, true}) {
        out << to_string(scenario.tag) << ',' << k << ',' << (upper_side ? "upper" : "lower")
            << ',' << format_double(variance_ratio(run, k, upper_side)) << '\n';
      }
    }
  }
  write_manifest(sub, dir);
  std::printf("sensitivity %s complete: %s\n", to_string(scenario.tag).c_str(),
              dir.string().c_str());
}

// --- bench ---------------------------------------------------------------

struct BenchConfig {
  std::string portfolio, events, out;
  int n_years = 0;
  std::size_t m = 100;
  std::uint64_t seed = 0;
  int repeats = 10;
  std::string family = "B2";
  bool with_b1 = false;
  int threads = default_threads();
};

struct Timing {
  double mean = 0, sd = 0;
};

template <typename Fn>
Timing time_repeated(int repeats, Fn&& fn) {
  std::vector<double> secs(static_cast<std::size_t>(repeats));
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    secs[static_cast<std::size_t>(r)] = std::chrono::duration<double>(stop - start).count();
  }
  Timing t;
  for (double s : secs) t.mean += s;
  t.mean /= secs.size();
  double ss = 0;
  for (double s : secs) ss += (s - t.mean) * (s - t.mean);
  t.sd = secs.size() > 1 ? std::sqrt(ss / (secs.size() - 1)) : 0.0;
  return t;
}

void cmd_bench(const BenchConfig& cfg, const CLI::App* sub) {
  const fs::path dir = ensure_outdir(cfg.out);
  auto out = open_output(dir / "timings.csv");
  out << "method,phase,m,mean_seconds,sd_seconds\n";
  auto emit = [&](const std::string& method, const std::string& phase, const Timing& t) {
    out << method << ',' << phase << ',' << cfg.m << ',' << format_double(t.mean) << ','
        << format_double(t.sd) << '\n';
    std::printf("%-14s %-6s  %10.4f s  (sd %.4f)\n", method.c_str(), phase.c_str(), t.mean,
                t.sd);
  };

  LoadedData data;
  Timing setup_std = time_repeated(cfg.repeats, [&] {
    data = load_data(cfg.portfolio, cfg.events, cfg.n_years);
  });
  emit("standard", "setup", setup_std);

  std::vector<YearSummary> summaries;
  Timing setup_conc = time_repeated(cfg.repeats, [&] {
    auto fresh = load_data(cfg.portfolio, cfg.events, cfg.n_years);
    summaries = summarize_years(fresh.years, 0, cfg.threads);
  });
  emit("concentration", "setup", setup_conc);

  Timing sim_std = time_repeated(cfg.repeats, [&] {
    ReplicateMatrix matrix = run_standard(data.years, cfg.m, cfg.seed, cfg.threads);
    (void)matrix;
  });
  emit("standard", "sim", sim_std);

  const BoundFamily family = family_from_string(cfg.family);
  Timing sim_direct = time_repeated(cfg.repeats, [&] {
    run_conservative(summaries, cfg.m, family, SamplePath::direct, cfg.seed, cfg.threads);
  });
  emit(to_string(family) + "-direct", "sim", sim_direct);

  if (cfg.with_b1) {
    Timing sim_b1 = time_repeated(cfg.repeats, [&] {
      run_conservative(summaries, cfg.m, BoundFamily::b1, SamplePath::direct, cfg.seed,
                       cfg.threads);
    });
    emit("B1-direct", "sim", sim_b1);
  }

  Timing sim_sir = time_repeated(cfg.repeats, [&] {
    run_conservative(summaries, cfg.m, BoundFamily::b2, SamplePath::sir, cfg.seed, cfg.threads);
  });
  emit("B2-sir", "sim", sim_sir);

  out.close();
  write_manifest(sub, dir);
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Conservative insurance-loss return levels from concentration bounds"};
  app.set_version_flag("--version", std::string(k_version));
  app.require_subcommand(1);
  app.set_config("--config", "", "rerun from a manifest / config file");

  // summarize
  SummarizeConfig sum_cfg;
  CLI::App* sum = app.add_subcommand("summarize", "Per-year summary statistics table");
  sum->add_option("--portfolio", sum_cfg.portfolio, "portfolio.csv path")->required();
  sum->add_option("--events", sum_cfg.events, "events.csv path")->required();
  sum->add_option("--n-years", sum_cfg.n_years, "year universe (default: max year present)")
      ->capture_default_str();
  sum->add_option("--threads", sum_cfg.threads, "worker threads (0 = auto)")->capture_default_str();
  sum->add_option("--out", sum_cfg.out, "output directory (optional)")->capture_default_str();

  // toy-gen
  ToyGenConfig toy_cfg;
  CLI::App* toy = app.add_subcommand("toy-gen", "Generate a toy scenario dataset");
  toy->add_option("--scenario", toy_cfg.scenario, "i, ii, iii or iv")->capture_default_str();
  toy->add_option("--n", toy_cfg.n, "number of risks")->capture_default_str();
  toy->add_option("--seed", toy_cfg.seed, "RNG seed")->required();
  toy->add_option("--out", toy_cfg.out, "output directory")->required();

  // bootstrap
  BootstrapConfig boot_cfg;
  CLI::App* boot = app.add_subcommand("bootstrap", "Scale a portfolio by stratified resampling");
  boot->add_option("--portfolio", boot_cfg.portfolio, "portfolio.csv path")->required();
  boot->add_option("--events", boot_cfg.events, "events.csv path")->required();
  boot->add_option("--factor", boot_cfg.factor, "scale factor")->capture_default_str();
  boot->add_option("--seed", boot_cfg.seed, "RNG seed")->required();
  boot->add_option("--out", boot_cfg.out, "output directory")->required();

  // bounds-curve
  CurveConfig curve_cfg;
  CLI::App* curve = app.add_subcommand("bounds-curve", "Per-year bound curves over a t grid");
  curve->add_option("--portfolio", curve_cfg.portfolio, "portfolio.csv path")->required();
  curve->add_option("--events", curve_cfg.events, "events.csv path")->required();
  curve->add_option("--n-years", curve_cfg.n_years, "year universe")->capture_default_str();
  curve->add_option("--year", curve_cfg.year, "year to plot")->capture_default_str();
  curve->add_option("--tail", curve_cfg.tail, "upper or lower")->capture_default_str();
  curve->add_option("--families", curve_cfg.families, "comma-separated bound families")
      ->capture_default_str();
  curve->add_option("--tmin", curve_cfg.tmin, "grid start")->capture_default_str();
  curve->add_option("--tmax", curve_cfg.tmax, "grid end (0 = auto)")->capture_default_str();
  curve->add_option("--tcount", curve_cfg.tcount, "grid size")->capture_default_str();
  curve->add_option("--higher-j", curve_cfg.higher_j, "J for the B-higher family")
      ->capture_default_str();
  curve->add_option("--mc-band", curve_cfg.mc_band,
                    "simulations for a 90% Monte Carlo band (0 = off)")
      ->capture_default_str();
  curve->add_option("--seed", curve_cfg.seed, "RNG seed for the MC band")->capture_default_str();
  curve->add_option("--threads", curve_cfg.threads, "worker threads (0 = auto)")
      ->capture_default_str();
  curve->add_option("--out", curve_cfg.out, "output directory")->required();

  // run
  RunConfig run_cfg;
  CLI::App* runc = app.add_subcommand("run", "Simulate yearly totals and report return levels");
  runc->add_option("--portfolio", run_cfg.portfolio, "portfolio.csv path")->required();
  runc->add_option("--events", run_cfg.events, "events.csv path")->required();
  runc->add_option("--n-years", run_cfg.n_years, "year universe")->capture_default_str();
  runc->add_option("--method", run_cfg.method, "standard, direct or sir")->capture_default_str();
  runc->add_option("--family", run_cfg.family, "bound family for direct/sir")
      ->capture_default_str();
  runc->add_option("--m", run_cfg.m, "replicates")->capture_default_str();
  runc->add_option("--seed", run_cfg.seed, "RNG seed")->required();
  runc->add_option("--ks", run_cfg.ks, "comma-separated return periods")->capture_default_str();
  runc->add_flag("--with-baseline", run_cfg.with_baseline,
                 "also run the standard method and attach the comparison");
  runc->add_option("--bootstrap-b", run_cfg.bootstrap_b, "bootstrap resamples for width SE")
      ->capture_default_str();
  runc->add_flag("--bin", run_cfg.binary, "also write binary matrix dumps");
  runc->add_option("--threads", run_cfg.threads, "worker threads (0 = auto)")
      ->capture_default_str();
  runc->add_option("--out", run_cfg.out, "output directory")->required();

  // return-levels
  ReturnLevelsConfig rl_cfg;
  CLI::App* rl = app.add_subcommand("return-levels", "Recompute a report from saved matrices");
  rl->add_option("--lower", rl_cfg.lower, "F- matrix file (csv or bin)")->required();
  rl->add_option("--upper", rl_cfg.upper, "F+ matrix file (csv or bin)")->required();
  rl->add_option("--baseline", rl_cfg.baseline, "standard-method matrix file")
      ->capture_default_str();
  rl->add_option("--ks", rl_cfg.ks, "comma-separated return periods")->capture_default_str();
  rl->add_option("--bootstrap-b", rl_cfg.bootstrap_b, "bootstrap resamples for width SE")
      ->capture_default_str();
  rl->add_option("--seed", rl_cfg.seed, "RNG seed for the bootstrap")->capture_default_str();
  rl->add_option("--out", rl_cfg.out, "output directory")->required();

  // sensitivity
  SensitivityConfig sens_cfg;
  CLI::App* sens = app.add_subcommand("sensitivity", "Damage-ratio perturbation study");
  sens->add_option("--portfolio", sens_cfg.portfolio, "portfolio.csv path")->required();
  sens->add_option("--events", sens_cfg.events, "events.csv path")->required();
  sens->add_option("--n-years", sens_cfg.n_years, "year universe")->capture_default_str();
  sens->add_option("--scenario", sens_cfg.scenario, "P0, P1, P2, P3 or P4")->capture_default_str();
  sens->add_option("--delta", sens_cfg.delta, "perturbation size (0 = scenario default)")
      ->capture_default_str();
  sens->add_option("--replicates", sens_cfg.replicates, "R portfolio replicates (P3/P4)")
      ->capture_default_str();
  sens->add_option("--m", sens_cfg.m, "replicates per portfolio")->capture_default_str();
  sens->add_option("--seed", sens_cfg.seed, "RNG seed")->required();
  sens->add_option("--ks", sens_cfg.ks, "comma-separated return periods")->capture_default_str();
  sens->add_option("--boxplot-k", sens_cfg.boxplot_k, "k for the long-format file (0 = max)")
      ->capture_default_str();
  sens->add_option("--threads", sens_cfg.threads, "worker threads (0 = auto)")
      ->capture_default_str();
  sens->add_option("--out", sens_cfg.out, "output directory")->required();

  // bench
  BenchConfig bench_cfg;
  CLI::App* bench = app.add_subcommand("bench", "Time the standard, direct and SIR paths");
  bench->add_option("--portfolio", bench_cfg.portfolio, "portfolio.csv path")->required();
  bench->add_option("--events", bench_cfg.events, "events.csv path")->required();
  bench->add_option("--n-years", bench_cfg.n_years, "year universe")->capture_default_str();
  bench->add_option("--m", bench_cfg.m, "replicates")->capture_default_str();
  bench->add_option("--seed", bench_cfg.seed, "RNG seed")->required();
  bench->add_option("--repeats", bench_cfg.repeats, "timing repetitions")->capture_default_str();
  bench->add_option("--family", bench_cfg.family, "bound family for the direct timing")
      ->capture_default_str();
  bench->add_flag("--with-b1", bench_cfg.with_b1, "also time direct B1 (slow)");
  bench->add_option("--threads", bench_cfg.threads, "worker threads (0 = auto)")
      ->capture_default_str();
  bench->add_option("--out", bench_cfg.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (sum->parsed()) cmd_summarize(sum_cfg, sum);
  if (toy->parsed()) cmd_toy_gen(toy_cfg, toy);
  if (boot->parsed()) cmd_bootstrap(boot_cfg, boot);
  if (curve->parsed()) cmd_bounds_curve(curve_cfg, curve);
  if (runc->parsed()) cmd_run(run_cfg, runc);
  if (rl->parsed()) cmd_return_levels(rl_cfg, rl);
  if (sens->parsed()) cmd_sensitivity(sens_cfg, sens);
  if (bench->parsed()) cmd_bench(bench_cfg, bench);
  return 0;
}

}  // namespace losscap_cli
