#pragma once

// File output helpers: atomic writes, CSV tables and simple SVG line plots.

#include <string>
#include <vector>

namespace geoflat {

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partial file. Throws Error on failure.
void atomic_write(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

/// Shortest round-trip decimal form of a double.
std::string format_number(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string str() const;
};

struct PlotSeries {
  std::string label;
  std::vector<double> y;
};

/// One panel per group of series, sharing the x axis.
struct PlotPanel {
  std::string title;
  std::vector<PlotSeries> series;
};

std::string svg_plot(const std::vector<double>& x, const std::vector<PlotPanel>& panels, const std::string& x_label);

}  // namespace geoflat
