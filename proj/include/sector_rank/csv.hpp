#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sector_rank::csv {

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split(std::string_view line);

/// Quotes a field only when it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

/// Shortest representation that round-trips to the same double.
std::string format(double value);

/// Strict parse of the whole field; surrounding spaces are ignored.
std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_int(std::string_view field);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws std::out_of_range when absent.
  std::size_t column(std::string_view name) const;
};

/// Reads a CSV with a header line. Lines starting with '#' before the header are
/// skipped. Throws std::runtime_error on ragged rows.
Table read(std::istream& in);
Table read(const std::filesystem::path& path);

}  // namespace sector_rank::csv
