#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace aane::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws InputError naming the file if absent.
  std::size_t column(std::string_view name) const;
  std::filesystem::path source;
};

/// Reads a comma-separated file with a header row. Fields may be double-quoted.
Table read(const std::filesystem::path& path);

/// Parses a numeric field; empty or "NA"/"nan" fields parse as NaN.
double parse_number(std::string_view field, const std::filesystem::path& source);

/// Fixed 12-significant-digit formatting used by every CSV the tool writes.
/// Negative zero prints as "0" so output bytes do not depend on sign of zero.
std::string format_number(double value);

class Writer {
 public:
  explicit Writer(std::vector<std::string> header);
  void add_row(std::vector<std::string> row);
  std::string str() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes text with '\n' line endings, creating parent directories.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace aane::csv
