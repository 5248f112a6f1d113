#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace csts {

/// Minimal RFC 4180 row handling (quoted fields, doubled quotes; no embedded newlines).
std::vector<std::string> parse_csv_line(std::string_view line);
std::string format_csv_line(const std::vector<std::string>& fields);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `column` in the header, or -1.
  int column(std::string_view name) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

}  // namespace csts
