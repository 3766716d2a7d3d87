#pragma once

// CSV tables and a minimal SVG plot emitter.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "pbgeo/error.hpp"
#include "pbgeo/geometry.hpp"

namespace pbgeo {

/// Shortest decimal that round-trips a double.
inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw Error(ErrorCode::InvalidArgument, "CSV row has the wrong width");
    rows_.push_back(std::move(row));
  }

  void add_row(const std::vector<double>& row) {
    std::vector<std::string> s;
    for (double x : row) s.push_back(fmt_double(x));
    add_row(std::move(s));
  }

  std::string str() const {
    std::ostringstream o;
    auto line = [&](const std::vector<std::string>& r) {
      for (size_t i = 0; i < r.size(); ++i) o << (i ? "," : "") << r[i];
      o << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return o.str();
  }

  void write(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::Format, "cannot open '" + path + "' for writing");
    f << str();
  }

  size_t size() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// 2-D plot: polylines and scatter layers with automatic bounds and axes.
class SvgPlot {
 public:
  SvgPlot(std::string title, int width = 640, int height = 640) : title_(std::move(title)), w_(width), h_(height) {}

  void polyline(const std::vector<Vec>& pts, const std::string& color, double stroke = 2.0) {
    layers_.push_back({pts, color, stroke, false});
  }

  void scatter(const std::vector<Vec>& pts, const std::string& color, double radius = 2.5) {
    layers_.push_back({pts, color, radius, true});
  }

  std::string str() const {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& l : layers_)
      for (const Vec& p : l.pts) {
        x0 = std::min(x0, p(0));
        x1 = std::max(x1, p(0));
        y0 = std::min(y0, p(1));
        y1 = std::max(y1, p(1));
      }
    if (!(x1 >= x0)) x0 = y0 = -1.0, x1 = y1 = 1.0;
    const double span = std::max({x1 - x0, y1 - y0, 1e-9});
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    const double margin = 40.0;
    const double scale = (std::min(w_, h_) - 2.0 * margin) / span;
    auto px = [&](double x) { return 0.5 * w_ + scale * (x - cx); };
    auto py = [&](double y) { return 0.5 * h_ - scale * (y - cy); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_ << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << margin << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title_ << "</text>\n";
    // Axes through the origin when visible, else along the frame.
    const double ax = (x0 <= 0.0 && 0.0 <= x1) ? px(0.0) : margin;
    const double ay = (y0 <= 0.0 && 0.0 <= y1) ? py(0.0) : h_ - margin;
    o << "<line x1=\"" << margin << "\" y1=\"" << ay << "\" x2=\"" << w_ - margin << "\" y2=\"" << ay
      << "\" stroke=\"#999\" stroke-width=\"1\"/>\n";
    o << "<line x1=\"" << ax << "\" y1=\"" << margin << "\" x2=\"" << ax << "\" y2=\"" << h_ - margin
      << "\" stroke=\"#999\" stroke-width=\"1\"/>\n";
    for (const auto& l : layers_) {
      if (l.dots) {
        for (const Vec& p : l.pts)
          o << "<circle cx=\"" << px(p(0)) << "\" cy=\"" << py(p(1)) << "\" r=\"" << l.size << "\" fill=\"" << l.color
            << "\"/>\n";
      } else {
        o << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"" << l.size << "\" points=\"";
        for (const Vec& p : l.pts) o << px(p(0)) << ',' << py(p(1)) << ' ';
        o << "\"/>\n";
      }
    }
    o << "</svg>\n";
    return o.str();
  }

  void write(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::Format, "cannot open '" + path + "' for writing");
    f << str();
  }

 private:
  struct Layer {
    std::vector<Vec> pts;
    std::string color;
    double size;
    bool dots;
  };
  std::string title_;
  int w_, h_;
  std::vector<Layer> layers_;
};

}  // namespace pbgeo
