#include "losscap/mc.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "losscap/csv.hpp"
#include "losscap/errors.hpp"
#include "losscap/parallel.hpp"

namespace losscap {

static_assert(std::endian::native == std::endian::little,
              "binary matrix format assumes a little-endian host");

std::string to_string(SimMethod method) {
  switch (method) {
    case SimMethod::standard: return "standard";
    case SimMethod::direct_fminus: return "direct-F-";
    case SimMethod::direct_fplus: return "direct-F+";
    case SimMethod::sir_fminus: return "sir-F-";
    case SimMethod::sir_fplus: return "sir-F+";
  }
  return "?";
}

double sample_damage_ratio(double alpha, double beta, Rng& rng) {
  if (alpha > 1e8 || beta > 1e8) return alpha / (alpha + beta);
  return rng.beta(alpha, beta);
}

double simulate_year_standard(std::span<const LossTerm> terms, Rng& rng) {
  double total = 0.0;
  for (const auto& term : terms) {
    if (!(term.p > 0.0)) continue;
    for (std::int64_t s = 0; s < term.n_sub; ++s) {
      if (rng.uniform() < term.p)
        total += term.exposure * sample_damage_ratio(term.alpha, term.beta, rng);
    }
  }
  return total;
}

ReplicateMatrix run_standard(const std::vector<YearTerms>& years, std::size_t n_replicates,
                             std::uint64_t seed, int threads) {
  if (n_replicates == 0) throw ValidationError("run_standard: need at least one replicate");
  ReplicateMatrix out;
  out.method = SimMethod::standard;
  out.seed = seed;
  out.n_replicates = n_replicates;
  out.years.reserve(years.size());
  for (const auto& y : years) out.years.push_back(y.year);
  out.values.assign(n_replicates * years.size(), 0.0);
  parallel_for(n_replicates, threads, [&](std::size_t m) {
    for (std::size_t y = 0; y < years.size(); ++y) {
      Rng rng(seed, StreamPurpose::standard_sim, m, static_cast<std::uint64_t>(years[y].year));
      out.at(m, y) = simulate_year_standard(years[y].terms, rng);
    }
  });
  return out;
}

void write_matrix_csv(const std::filesystem::path& path, const ReplicateMatrix& matrix) {
  auto out = open_output(path);
  out << "replicate,year,total\n";
  for (std::size_t m = 0; m < matrix.n_replicates; ++m)
    for (std::size_t y = 0; y < matrix.years.size(); ++y)
      out << m << ',' << matrix.years[y] << ',' << format_double(matrix.at(m, y)) << '\n';
}

ReplicateMatrix read_matrix_csv(const std::filesystem::path& path) {
  CsvReader reader(path, {"replicate", "year", "total"});
  std::vector<std::string_view> fields;
  std::map<std::int32_t, std::size_t> year_col;
  std::vector<std::tuple<std::int64_t, std::int32_t, double>> cells;
  std::int64_t max_rep = -1;
  while (reader.next(fields)) {
    auto rep = parse_int(fields[0], reader.location());
    auto year = static_cast<std::int32_t>(parse_int(fields[1], reader.location()));
    auto value = parse_double(fields[2], reader.location());
    year_col.emplace(year, 0);
    max_rep = std::max(max_rep, rep);
    cells.emplace_back(rep, year, value);
  }
  if (max_rep < 0) throw ValidationError(path.string() + ": no data rows");
  ReplicateMatrix out;
  out.n_replicates = static_cast<std::size_t>(max_rep + 1);
  std::size_t col = 0;
  for (auto& [year, idx] : year_col) {
    idx = col++;
    out.years.push_back(year);
  }
  out.values.assign(out.n_replicates * out.years.size(), 0.0);
  for (const auto& [rep, year, value] : cells)
    out.at(static_cast<std::size_t>(rep), year_col[year]) = value;
  return out;
}

namespace {

constexpr char k_magic[8] = {'L', 'C', 'R', 'M', '0', '0', '0', '1'};

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::ifstream& in, const std::string& context) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw ValidationError(context + ": truncated matrix file");
  return v;
}

}  // namespace

void write_matrix_binary(const std::filesystem::path& path, const ReplicateMatrix& matrix) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path.string());
  out.write(k_magic, sizeof(k_magic));
  put<std::uint64_t>(out, matrix.n_replicates);
  put<std::uint64_t>(out, matrix.years.size());
  put<std::uint64_t>(out, matrix.seed);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(matrix.method));
  for (auto y : matrix.years) put<std::int64_t>(out, y);
  out.write(reinterpret_cast<const char*>(matrix.values.data()),
            static_cast<std::streamsize>(matrix.values.size() * sizeof(double)));
  if (!out) throw ValidationError("write failed: " + path.string());
}

ReplicateMatrix read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, k_magic, sizeof(magic)) != 0)
    throw ValidationError(path.string() + ": not a matrix dump (bad magic)");
  ReplicateMatrix out;
  const std::string ctx = path.string();
  out.n_replicates = get<std::uint64_t>(in, ctx);
  const auto n_years = get<std::uint64_t>(in, ctx);
  out.seed = get<std::uint64_t>(in, ctx);
  out.method = static_cast<SimMethod>(get<std::uint64_t>(in, ctx));
  out.years.resize(n_years);
  for (auto& y : out.years) y = static_cast<std::int32_t>(get<std::int64_t>(in, ctx));
  out.values.resize(out.n_replicates * n_years);
  in.read(reinterpret_cast<char*>(out.values.data()),
          static_cast<std::streamsize>(out.values.size() * sizeof(double)));
  if (!in) throw ValidationError(ctx + ": truncated matrix file");
  return out;
}

ReplicateMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw ValidationError("cannot open " + path.string());
  char magic[8] = {};
  probe.read(magic, sizeof(magic));
  probe.close();
  if (std::memcmp(magic, k_magic, sizeof(k_magic)) == 0) return read_matrix_binary(path);
  return read_matrix_csv(path);
}

}  // namespace losscap
