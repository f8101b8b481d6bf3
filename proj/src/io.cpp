#include "geoflat/io.hpp"

#include "geoflat/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace geoflat {

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move output into place at '" + path + "'");
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double x) {
  std::ostringstream ss;
  ss.precision(4);
  ss << x;
  return ss.str();
}

}  // namespace

std::string svg_plot(const std::vector<double>& x, const std::vector<PlotPanel>& panels, const std::string& x_label) {
  const double width = 720, panel_h = 200, margin_l = 70, margin_r = 140, margin_t = 30, gap = 50;
  const double height = margin_t + panels.size() * (panel_h + gap);
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const double x0 = x.empty() ? 0.0 : x.front(), x1 = x.empty() ? 1.0 : x.back();
  const double plot_w = width - margin_l - margin_r;
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const double top = margin_t + p * (panel_h + gap);
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& s : panels[p].series) {
      for (double v : s.y) {
        if (std::isfinite(v)) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
    }
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      lo -= 0.5;
      hi += 0.5;
    }
    auto sx = [&](double v) { return margin_l + (x1 > x0 ? (v - x0) / (x1 - x0) : 0.0) * plot_w; };
    auto sy = [&](double v) { return top + panel_h - (v - lo) / (hi - lo) * panel_h; };
    svg << "<text x=\"" << margin_l << "\" y=\"" << top - 8 << "\" font-weight=\"bold\">" << panels[p].title
        << "</text>\n";
    svg << "<rect x=\"" << margin_l << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << panel_h
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << margin_l - 6 << "\" y=\"" << top + 4 << "\" text-anchor=\"end\">" << fmt(hi) << "</text>\n";
    svg << "<text x=\"" << margin_l - 6 << "\" y=\"" << top + panel_h << "\" text-anchor=\"end\">" << fmt(lo)
        << "</text>\n";
    svg << "<text x=\"" << margin_l << "\" y=\"" << top + panel_h + 14 << "\">" << fmt(x0) << "</text>\n";
    svg << "<text x=\"" << margin_l + plot_w << "\" y=\"" << top + panel_h + 14 << "\" text-anchor=\"end\">"
        << fmt(x1) << " " << x_label << "</text>\n";
    for (std::size_t k = 0; k < panels[p].series.size(); ++k) {
      const auto& s = panels[p].series[k];
      const char* color = kColors[k % std::size(kColors)];
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.y.size() && i < x.size(); ++i) {
        if (std::isfinite(s.y[i])) svg << fmt(sx(x[i])) << ',' << fmt(sy(s.y[i])) << ' ';
      }
      svg << "\"/>\n";
      svg << "<text x=\"" << margin_l + plot_w + 10 << "\" y=\"" << top + 14 + 14 * k << "\" fill=\"" << color
          << "\">" << s.label << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace geoflat
