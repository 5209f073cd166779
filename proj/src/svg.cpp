#include "gwla/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace gwla {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 400;
constexpr int kLeft = 60, kRight = 20, kTop = 30, kBottom = 40;
constexpr int kPlotW = kWidth - kLeft - kRight;
constexpr int kPlotH = kHeight - kTop - kBottom;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

struct Range {
  double lo, hi;
  double span() const { return hi - lo; }
};

Range pad_range(double lo, double hi) {
  if (lo > hi) std::swap(lo, hi);
  if (lo == hi) {
    double pad = lo == 0 ? 1.0 : std::fabs(lo) * 0.1;
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

double map_x(double v, const Range& r) { return kLeft + (v - r.lo) / r.span() * kPlotW; }
double map_y(double v, const Range& r) { return kTop + kPlotH - (v - r.lo) / r.span() * kPlotH; }

/// Roughly five round-number ticks covering the range.
std::vector<double> ticks(const Range& r) {
  double raw = r.span() / 5.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> out;
  double first = std::ceil(r.lo / step) * step;
  for (double v = first; v <= r.hi + step * 1e-9; v += step) {
    if (std::fabs(v) < step * 1e-9) v = 0;
    out.push_back(v);
  }
  return out;
}

std::string chart_open(const std::string& title) {
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
         "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " + std::to_string(kWidth) +
         " " + std::to_string(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + std::to_string(kWidth / 2) +
         "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         escape(title) + "</text>\n";
  return svg;
}

std::string axes(const Range& xr, const Range& yr, bool draw_x_ticks) {
  std::string svg;
  svg += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + std::to_string(kTop) + "\" x2=\"" +
         std::to_string(kLeft) + "\" y2=\"" + std::to_string(kTop + kPlotH) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + std::to_string(kTop + kPlotH) +
         "\" x2=\"" + std::to_string(kLeft + kPlotW) + "\" y2=\"" +
         std::to_string(kTop + kPlotH) + "\" stroke=\"black\"/>\n";
  for (double v : ticks(yr)) {
    double y = map_y(v, yr);
    svg += "<line x1=\"" + std::to_string(kLeft - 4) + "\" y1=\"" + fmt(y) + "\" x2=\"" +
           std::to_string(kLeft) + "\" y2=\"" + fmt(y) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + std::to_string(kLeft - 7) + "\" y=\"" + fmt(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + fmt(v) +
           "</text>\n";
  }
  if (draw_x_ticks) {
    for (double v : ticks(xr)) {
      double x = map_x(v, xr);
      svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + std::to_string(kTop + kPlotH) + "\" x2=\"" +
             fmt(x) + "\" y2=\"" + std::to_string(kTop + kPlotH + 4) + "\" stroke=\"black\"/>\n";
      svg += "<text x=\"" + fmt(x) + "\" y=\"" + std::to_string(kTop + kPlotH + 16) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + fmt(v) +
             "</text>\n";
    }
  }
  return svg;
}

std::string legend(const std::vector<std::string>& names) {
  std::string svg;
  int x = kLeft + 8;
  for (size_t i = 0; i < names.size(); ++i) {
    const char* colour = kPalette[i % kPaletteSize];
    int y = kTop + 8 + static_cast<int>(i) * 16;
    svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
           "\" width=\"10\" height=\"10\" fill=\"" + std::string(colour) + "\"/>\n";
    svg += "<text x=\"" + std::to_string(x + 14) + "\" y=\"" + std::to_string(y + 9) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(names[i]) + "</text>\n";
  }
  return svg;
}

}  // namespace

std::string svg_line_chart(const CsvTable& table, const std::string& title) {
  if (table.header.size() < 2)
    throw std::invalid_argument("line chart needs at least two columns, got " +
                                std::to_string(table.header.size()));
  if (table.rows.empty()) throw std::invalid_argument("line chart needs at least one data row");
  size_t ncols = table.header.size();
  size_t nrows = table.rows.size();
  double xlo = table.number(0, 0), xhi = xlo;
  double ylo = table.number(0, 1), yhi = ylo;
  for (size_t r = 0; r < nrows; ++r) {
    double x = table.number(r, 0);
    xlo = std::min(xlo, x);
    xhi = std::max(xhi, x);
    for (size_t c = 1; c < ncols; ++c) {
      double y = table.number(r, static_cast<int>(c));
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  }
  Range xr = pad_range(xlo, xhi);
  Range yr = pad_range(ylo, yhi);

  std::string svg = chart_open(title);
  svg += axes(xr, yr, true);
  for (size_t c = 1; c < ncols; ++c) {
    const char* colour = kPalette[(c - 1) % kPaletteSize];
    std::string pts;
    for (size_t r = 0; r < nrows; ++r) {
      if (r) pts += " ";
      pts += fmt(map_x(table.number(r, 0), xr)) + "," +
             fmt(map_y(table.number(r, static_cast<int>(c)), yr));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(colour) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
  }
  svg += legend(std::vector<std::string>(table.header.begin() + 1, table.header.end()));
  svg += "</svg>\n";
  return svg;
}

std::string svg_bar_chart(const CsvTable& table, const std::string& title) {
  if (table.header.size() < 2)
    throw std::invalid_argument("bar chart needs at least two columns, got " +
                                std::to_string(table.header.size()));
  if (table.rows.empty()) throw std::invalid_argument("bar chart needs at least one data row");
  size_t ncols = table.header.size();
  size_t nrows = table.rows.size();
  double ylo = 0, yhi = 0;
  for (size_t r = 0; r < nrows; ++r)
    for (size_t c = 1; c < ncols; ++c) {
      double y = table.number(r, static_cast<int>(c));
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  Range yr = pad_range(ylo, yhi);

  std::string svg = chart_open(title);
  svg += axes({0, 1}, yr, false);
  double slot = static_cast<double>(kPlotW) / nrows;
  double group = slot * 0.8;
  double bar = group / static_cast<double>(ncols - 1);
  double ybase = map_y(std::max(0.0, yr.lo), yr);
  for (size_t r = 0; r < nrows; ++r) {
    double x0 = kLeft + slot * r + slot * 0.1;
    for (size_t c = 1; c < ncols; ++c) {
      double v = table.number(r, static_cast<int>(c));
      double ytop = map_y(v, yr);
      double top = std::min(ytop, ybase), h = std::fabs(ytop - ybase);
      const char* colour = kPalette[(c - 1) % kPaletteSize];
      svg += "<rect x=\"" + fmt(x0 + bar * (c - 1)) + "\" y=\"" + fmt(top) + "\" width=\"" +
             fmt(bar) + "\" height=\"" + fmt(h) + "\" fill=\"" + std::string(colour) + "\"/>\n";
    }
    svg += "<text x=\"" + fmt(x0 + group / 2) + "\" y=\"" + std::to_string(kTop + kPlotH + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
           escape(table.rows[r][0]) + "</text>\n";
  }
  svg += legend(std::vector<std::string>(table.header.begin() + 1, table.header.end()));
  svg += "</svg>\n";
  return svg;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace gwla
