#pragma once

#include <string>
#include <vector>

#include "gwla/csv.hpp"

namespace gwla {

/// Deterministic, self-contained charts (no timestamps, fixed formatting):
/// identical input produces byte-identical SVG.

/// One polyline per y column against the first column.
std::string svg_line_chart(const CsvTable& table, const std::string& title);

/// Grouped bars: first column is the category label, remaining columns are
/// series.
std::string svg_bar_chart(const CsvTable& table, const std::string& title);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace gwla
