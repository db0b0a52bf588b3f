#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace memu {

/// Nine significant digits, the precision used in every emitted file.
std::string format_number(double value);

/// Minimal comma-separated writer; rows are terminated with '\n'.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(const std::vector<std::string>& columns);
  CsvWriter& cell(double value);
  CsvWriter& cell(long long value);
  CsvWriter& cell(std::string_view text);
  void end_row();

 private:
  void separator();

  std::ostream& out_;
  bool first_ = true;
};

/// Parses a CSV file with a header row into column-major numbers. Non-numeric
/// cells become NaN. Used by tests and consistency checks.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
};
CsvTable read_csv(const std::string& path);

}  // namespace memu
