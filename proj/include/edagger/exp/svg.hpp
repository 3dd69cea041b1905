#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace edagger::exp {

/// Data-to-pixel mapping for one plot area.
struct Axes {
  double left, top, width, height;
  double xmin, xmax, ymin, ymax;

  double px(double x) const { return left + (x - xmin) / (xmax - xmin) * width; }
  double py(double y) const { return top + height - (y - ymin) / (ymax - ymin) * height; }
};

/// Small SVG writer; just the primitives the experiment plots use.
class Svg {
 public:
  Svg(double width, double height);

  void rect(double x, double y, double w, double h, std::string_view fill, double opacity = 1.0);
  void circle(double cx, double cy, double r, std::string_view fill, double opacity = 1.0);
  void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1.0);
  void polyline(const std::vector<std::pair<double, double>>& points, std::string_view stroke, double width = 1.5);
  /// Closed filled polygon.
  void polygon(const std::vector<std::pair<double, double>>& points, std::string_view fill, double opacity);
  void text(double x, double y, std::string_view content, double size = 12.0, std::string_view anchor = "start");
  /// Frame, ticks and labels around `axes`.
  void frame(const Axes& axes, std::string_view title, std::string_view xlabel, std::string_view ylabel);

  std::string str() const;
  void save(const std::filesystem::path& path) const;

 private:
  double width_, height_;
  std::string body_;
};

std::string palette(std::size_t index);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional error bars, same length as y
};

/// Line chart with optional error bars and a legend.
void write_line_chart(const std::filesystem::path& path, std::string_view title, std::string_view xlabel,
                      std::string_view ylabel, const std::vector<Series>& series);

}  // namespace edagger::exp
