#pragma once

// The standard (baseline) Monte Carlo method: simulate every subrisk loss of
// every event and sum, M replicates per year. Also the ReplicateMatrix that
// every simulation path produces, and its export formats.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "losscap/portfolio.hpp"
#include "losscap/rng.hpp"

namespace losscap {

enum class SimMethod : std::uint8_t {
  standard = 0,
  direct_fminus = 1,
  direct_fplus = 2,
  sir_fminus = 3,
  sir_fplus = 4,
};

std::string to_string(SimMethod method);

// M x n_years grid of simulated yearly totals, row per replicate.
struct ReplicateMatrix {
  std::vector<std::int32_t> years;  // column labels, ascending
  std::size_t n_replicates = 0;
  std::vector<double> values;  // row-major
  SimMethod method = SimMethod::standard;
  std::uint64_t seed = 0;

  double& at(std::size_t m, std::size_t y) { return values[m * years.size() + y]; }
  double at(std::size_t m, std::size_t y) const { return values[m * years.size() + y]; }
  std::span<const double> row(std::size_t m) const {
    return {values.data() + m * years.size(), years.size()};
  }
};

// Damage-ratio draw for the wet branch; alpha or beta above 1e8 is treated
// as a point mass at alpha/(alpha+beta).
double sample_damage_ratio(double alpha, double beta, Rng& rng);

// One yearly total by brute force: every subrisk of every term is simulated
// individually and summed.
double simulate_year_standard(std::span<const LossTerm> terms, Rng& rng);

// Replicate m of year y consumes the (seed, standard_sim, m, y) substream,
// so the matrix is reproducible cell-by-cell whatever the thread count.
ReplicateMatrix run_standard(const std::vector<YearTerms>& years, std::size_t n_replicates,
                             std::uint64_t seed, int threads = 0);

// CSV: header replicate,year,total (replicates then years, both ascending).
void write_matrix_csv(const std::filesystem::path& path, const ReplicateMatrix& matrix);
ReplicateMatrix read_matrix_csv(const std::filesystem::path& path);

// Compact dump, little-endian:
//   bytes 0..7   magic "LCRM0001"
//   u64 n_replicates, u64 n_years, u64 seed, u64 method tag
//   n_years * i64 year ids
//   n_replicates * n_years * f64 totals, row-major
void write_matrix_binary(const std::filesystem::path& path, const ReplicateMatrix& matrix);
ReplicateMatrix read_matrix_binary(const std::filesystem::path& path);

// Reads either format, sniffing the magic bytes.
ReplicateMatrix read_matrix(const std::filesystem::path& path);

}  // namespace losscap
