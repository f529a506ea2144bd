#pragma once

// Minimal CSV and number formatting helpers. No quoting: every format in this
// project uses comma-free fields. Doubles are written with std::to_chars
// (shortest round-trip form), so write-then-read reproduces values bit for
// bit and reruns produce byte-identical files.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace losscap {

std::string format_double(double v);
double parse_double(std::string_view field, const std::string& context);
std::int64_t parse_int(std::string_view field, const std::string& context);

// Splits one CSV record on ','. Empty fields are preserved.
std::vector<std::string_view> split_csv(std::string_view line);

// Line-oriented reader that tracks 1-based line numbers for error messages
// and checks the header against the expected column list.
class CsvReader {
 public:
  CsvReader(const std::filesystem::path& path, const std::vector<std::string>& expected_header);

  // Fetches the next non-empty record; returns false at EOF. Field views are
  // valid until the next call.
  bool next(std::vector<std::string_view>& fields);

  std::size_t line_number() const { return line_; }
  std::string location() const;

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::string buffer_;
  std::size_t line_ = 0;
  std::size_t n_columns_ = 0;
};

// Opens for writing, throws ValidationError on failure.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace losscap
