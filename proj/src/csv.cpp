#include "gwla/csv.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gwla {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

double CsvTable::number(size_t row, int col) const {
  if (row >= rows.size() || col < 0 || static_cast<size_t>(col) >= header.size())
    throw std::out_of_range("csv cell out of range: row " + std::to_string(row) + ", col " +
                            std::to_string(col));
  const std::string& cell = rows[row][col];
  char* end = nullptr;
  double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0')
    throw std::invalid_argument("csv cell is not a number: '" + cell + "' (row " +
                                std::to_string(row) + ", column " + header[col] + ")");
  return v;
}

CsvTable parse_csv(const std::string& text, const std::string& origin) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(t.header.size()) + " columns, got " +
                                  std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw std::invalid_argument(origin + ": missing header row");
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open csv file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path);
}

void write_csv(const std::string& path, const CsvTable& table) {
  auto check = [](const std::string& field) {
    if (field.find(',') != std::string::npos || field.find('\n') != std::string::npos)
      throw std::invalid_argument("csv field may not contain comma or newline: '" + field + "'");
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write csv file: " + path);
  for (size_t i = 0; i < table.header.size(); ++i) {
    check(table.header[i]);
    out << (i ? "," : "") << table.header[i];
  }
  out << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw std::invalid_argument("csv row width " + std::to_string(row.size()) +
                                  " does not match header width " +
                                  std::to_string(table.header.size()));
    for (size_t i = 0; i < row.size(); ++i) {
      check(row[i]);
      out << (i ? "," : "") << row[i];
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace gwla
