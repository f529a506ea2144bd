#include "losscap/csv.hpp"

#include <charconv>
#include <system_error>

#include "losscap/errors.hpp"

namespace losscap {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw NumericError("format_double: to_chars failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view field, const std::string& context) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ValidationError(context + ": not a number: '" + std::string(field) + "'");
  return v;
}

std::int64_t parse_int(std::string_view field, const std::string& context) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ValidationError(context + ": not an integer: '" + std::string(field) + "'");
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

CsvReader::CsvReader(const std::filesystem::path& path, const std::vector<std::string>& expected_header)
    : path_(path), in_(path) {
  if (!in_) throw ValidationError("cannot open " + path.string());
  if (!std::getline(in_, buffer_)) throw ValidationError(path.string() + ": empty file, header expected");
  if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
  line_ = 1;
  auto fields = split_csv(buffer_);
  n_columns_ = expected_header.size();
  bool ok = fields.size() == expected_header.size();
  for (std::size_t i = 0; ok && i < fields.size(); ++i) ok = fields[i] == expected_header[i];
  if (!ok) {
    std::string want;
    for (std::size_t i = 0; i < expected_header.size(); ++i) {
      if (i) want += ',';
      want += expected_header[i];
    }
    throw ValidationError(path.string() + ":1: bad header, expected '" + want + "', got '" + buffer_ + "'");
  }
}

bool CsvReader::next(std::vector<std::string_view>& fields) {
  while (std::getline(in_, buffer_)) {
    ++line_;
    if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
    if (buffer_.empty()) continue;
    fields = split_csv(buffer_);
    if (fields.size() != n_columns_)
      throw ValidationError(location() + ": expected " + std::to_string(n_columns_) +
                            " fields, got " + std::to_string(fields.size()));
    return true;
  }
  return false;
}

std::string CsvReader::location() const {
  return path_.string() + ":" + std::to_string(line_);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: no newline translation
  if (!out) throw ValidationError("cannot open for writing: " + path.string());
  return out;
}

}  // namespace losscap
