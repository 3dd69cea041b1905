#include "edagger/exp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace edagger::exp {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

Svg::Svg(double width, double height) : width_(width), height_(height) {}

void Svg::rect(double x, double y, double w, double h, std::string_view fill, double opacity) {
  body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
           "\" fill=\"" + std::string(fill) + "\" fill-opacity=\"" + num(opacity) + "\"/>\n";
}

void Svg::circle(double cx, double cy, double r, std::string_view fill, double opacity) {
  body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" +
           std::string(fill) + "\" fill-opacity=\"" + num(opacity) + "\"/>\n";
}

void Svg::line(double x1, double y1, double x2, double y2, std::string_view stroke, double width) {
  body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
           "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + num(width) + "\"/>\n";
}

void Svg::polyline(const std::vector<std::pair<double, double>>& points, std::string_view stroke, double width) {
  if (points.empty()) return;
  body_ += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + num(width) +
           "\" points=\"";
  for (const auto& [x, y] : points) body_ += num(x) + "," + num(y) + " ";
  body_ += "\"/>\n";
}

void Svg::polygon(const std::vector<std::pair<double, double>>& points, std::string_view fill, double opacity) {
  if (points.empty()) return;
  body_ += "<polygon fill=\"" + std::string(fill) + "\" fill-opacity=\"" + num(opacity) + "\" stroke=\"none\" points=\"";
  for (const auto& [x, y] : points) body_ += num(x) + "," + num(y) + " ";
  body_ += "\"/>\n";
}

void Svg::text(double x, double y, std::string_view content, double size, std::string_view anchor) {
  body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + num(size) +
           "\" font-family=\"sans-serif\" text-anchor=\"" + std::string(anchor) + "\">" + escape(content) +
           "</text>\n";
}

void Svg::frame(const Axes& a, std::string_view title, std::string_view xlabel, std::string_view ylabel) {
  line(a.left, a.top + a.height, a.left + a.width, a.top + a.height, "black");
  line(a.left, a.top, a.left, a.top + a.height, "black");
  for (int i = 0; i <= 4; ++i) {
    const double fx = a.xmin + (a.xmax - a.xmin) * i / 4.0;
    const double fy = a.ymin + (a.ymax - a.ymin) * i / 4.0;
    line(a.px(fx), a.top + a.height, a.px(fx), a.top + a.height + 4, "black");
    text(a.px(fx), a.top + a.height + 16, tick_label(fx), 10, "middle");
    line(a.left - 4, a.py(fy), a.left, a.py(fy), "black");
    text(a.left - 6, a.py(fy) + 3, tick_label(fy), 10, "end");
  }
  text(a.left + a.width / 2, a.top - 8, title, 13, "middle");
  text(a.left + a.width / 2, a.top + a.height + 32, xlabel, 11, "middle");
  body_ += "<text x=\"" + num(a.left - 40) + "\" y=\"" + num(a.top + a.height / 2) +
           "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"middle\" transform=\"rotate(-90 " +
           num(a.left - 40) + " " + num(a.top + a.height / 2) + ")\">" + escape(ylabel) + "</text>\n";
}

std::string Svg::str() const {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" + num(height_) +
         "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
         body_ + "</svg>\n";
}

void Svg::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << str();
}

std::string palette(std::size_t index) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
  return kColors[index % (sizeof kColors / sizeof kColors[0])];
}

void write_line_chart(const std::filesystem::path& path, std::string_view title, std::string_view xlabel,
                      std::string_view ylabel, const std::vector<Series>& series) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double e = i < s.err.size() ? s.err[i] : 0.0;
      if (!std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i] - e);
      ymax = std::max(ymax, s.y[i] + e);
    }
  }
  if (!(xmin < xmax)) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (!(ymin < ymax)) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pad = 0.05 * (ymax - ymin);
  Svg svg(640, 420);
  const Axes axes{70, 40, 400, 320, xmin, xmax, ymin - pad, ymax + pad};
  svg.frame(axes, title, xlabel, ylabel);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const std::string color = palette(k);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      pts.emplace_back(axes.px(s.x[i]), axes.py(s.y[i]));
      if (i < s.err.size() && s.err[i] > 0.0) {
        svg.line(axes.px(s.x[i]), axes.py(s.y[i] - s.err[i]), axes.px(s.x[i]), axes.py(s.y[i] + s.err[i]), color);
      }
      svg.circle(axes.px(s.x[i]), axes.py(s.y[i]), 2.5, color);
    }
    svg.polyline(pts, color);
    svg.line(490, 60 + 18.0 * k, 510, 60 + 18.0 * k, color, 2.0);
    svg.text(515, 64 + 18.0 * k, s.name, 10);
  }
  svg.save(path);
}

}  // namespace edagger::exp
