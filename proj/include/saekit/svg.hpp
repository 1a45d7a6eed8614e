#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

// Static SVG charts. Output depends only on the inputs, so reruns are
// byte-identical.
namespace saekit::svg {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
  bool dashed = false;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;          // one polyline each
  std::vector<std::string> x_ticks;    // categorical axis: x values are 0..n-1
  std::vector<std::pair<std::string, double>> reference_lines;  // dashed horizontals
  bool log_y = false;
};

struct ScatterGroup {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct ScatterPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<ScatterGroup> groups;
};

struct BarGroup {
  std::string name;             // legend entry
  std::vector<double> values;   // one per category
};

struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::string> categories;
  std::vector<BarGroup> groups;
};

// True when the positive values span at least two orders of magnitude.
bool wants_log_scale(const std::vector<double>& values);

std::string render(const LinePlot& plot);
std::string render(const ScatterPlot& plot);
std::string render(const BarChart& chart);

std::string escape(const std::string& text);

}  // namespace saekit::svg
