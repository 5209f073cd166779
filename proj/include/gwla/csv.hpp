#pragma once

#include <string>
#include <vector>

namespace gwla {

/// Header + string rows; every row must match the header width.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
  double number(size_t row, int col) const;   // throws naming the cell
};

/// Throws on malformed input, naming the 1-based line number.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& origin = "<string>");

void write_csv(const std::string& path, const CsvTable& table);

}  // namespace gwla
