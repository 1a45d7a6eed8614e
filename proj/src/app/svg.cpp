#include "saekit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "saekit/error.hpp"

namespace saekit::svg {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;
constexpr double kPlotW = kWidth - kLeft - kRight, kPlotH = kHeight - kTop - kBottom;

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

const char* color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  if (v != 0.0 && (std::fabs(v) >= 1e4 || std::fabs(v) < 1e-2))
    std::snprintf(buf, sizeof buf, "%.1e", v);
  else
    std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-12 * std::max(1.0, std::fabs(hi))) {
      const double pad = std::max(std::fabs(hi) * 0.05, 0.05);
      lo -= pad;
      hi += pad;
    } else {
      const double pad = (hi - lo) * 0.05;
      lo -= pad;
      hi += pad;
    }
  }
};

class Canvas {
 public:
  Canvas() {
    out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
         << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }

  void text(double x, double y, const std::string& s, const char* anchor = "middle", const char* extra = "") {
    out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"" << anchor << "\"" << extra << ">"
         << escape(s) << "</text>\n";
  }

  void line(double x1, double y1, double x2, double y2, const char* stroke, const char* extra = "") {
    out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
         << "\" stroke=\"" << stroke << "\"" << extra << "/>\n";
  }

  void frame(const std::string& title, const std::string& x_label, const std::string& y_label) {
    text(kWidth / 2, 22, title, "middle", " font-size=\"15\"");
    out_ << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kPlotW << "\" height=\"" << kPlotH
         << "\" fill=\"none\" stroke=\"black\"/>\n";
    text(kLeft + kPlotW / 2, kHeight - 15, x_label);
    const double cy = kTop + kPlotH / 2;
    text(18, cy, y_label, "middle", (" transform=\"rotate(-90 18 " + num(cy) + ")\"").c_str());
  }

  void legend_entry(std::size_t i, const std::string& name, const char* stroke, bool dashed) {
    const double y = kTop + 10 + 18.0 * static_cast<double>(i);
    line(kLeft + kPlotW + 12, y, kLeft + kPlotW + 36, y, stroke,
         dashed ? " stroke-width=\"2\" stroke-dasharray=\"6 4\"" : " stroke-width=\"2\"");
    text(kLeft + kPlotW + 42, y + 4, name, "start");
  }

  std::ostringstream& raw() { return out_; }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  std::ostringstream out_;
};

struct Axis {
  double lo, hi;
  bool log;

  double map(double v) const {
    if (log) v = std::log10(v);
    return (v - lo) / (hi - lo);
  }
};

Axis make_axis(const std::vector<double>& values, bool log) {
  Range r;
  for (double v : values) {
    if (log && !(v > 0)) continue;
    r.add(log ? std::log10(v) : v);
  }
  if (log) {
    if (!std::isfinite(r.lo)) return {0, 1, true};
    return {std::floor(r.lo), std::max(std::ceil(r.hi), std::floor(r.lo) + 1), true};
  }
  r.finish();
  return {r.lo, r.hi, false};
}

void y_ticks(Canvas& c, const Axis& ay) {
  std::vector<double> ticks;
  if (ay.log) {
    for (double e = ay.lo; e <= ay.hi + 1e-9; e += 1) ticks.push_back(std::pow(10.0, e));
  } else {
    for (int i = 0; i <= 5; ++i) ticks.push_back(ay.lo + (ay.hi - ay.lo) * i / 5.0);
  }
  for (double t : ticks) {
    const double y = kTop + kPlotH * (1 - ay.map(t));
    c.line(kLeft - 4, y, kLeft, y, "black");
    c.line(kLeft, y, kLeft + kPlotW, y, "#dddddd");
    c.text(kLeft - 7, y + 4, tick_label(t), "end");
  }
}

void x_ticks(Canvas& c, const Axis& ax, const std::vector<std::string>& categories) {
  if (!categories.empty()) {
    for (std::size_t i = 0; i < categories.size(); ++i) {
      const double x = kLeft + kPlotW * ax.map(static_cast<double>(i));
      c.line(x, kTop + kPlotH, x, kTop + kPlotH + 4, "black");
      c.text(x, kTop + kPlotH + 18, categories[i]);
    }
    return;
  }
  for (int i = 0; i <= 5; ++i) {
    const double v = ax.lo + (ax.hi - ax.lo) * i / 5.0;
    const double x = kLeft + kPlotW * i / 5.0;
    c.line(x, kTop + kPlotH, x, kTop + kPlotH + 4, "black");
    c.text(x, kTop + kPlotH + 18, tick_label(v));
  }
}

}  // namespace

std::string escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

bool wants_log_scale(const std::vector<double>& values) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (double v : values)
    if (v > 0 && std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
  return std::isfinite(lo) && hi / lo >= 100.0;
}

std::string render(const LinePlot& plot) {
  std::vector<double> xs, ys;
  for (const auto& s : plot.series)
    for (auto [x, y] : s.points) xs.push_back(x), ys.push_back(y);
  for (const auto& [name, y] : plot.reference_lines) ys.push_back(y);
  if (!plot.x_ticks.empty()) {
    xs.push_back(0);
    xs.push_back(static_cast<double>(plot.x_ticks.size()) - 1);
  }
  const Axis ax = make_axis(xs, false);
  const Axis ay = make_axis(ys, plot.log_y);

  Canvas c;
  c.frame(plot.title, plot.x_label, plot.y_label + (plot.log_y ? " (log)" : ""));
  y_ticks(c, ay);
  x_ticks(c, ax, plot.x_ticks);

  auto px = [&](double x) { return kLeft + kPlotW * ax.map(x); };
  auto py = [&](double y) { return kTop + kPlotH * (1 - ay.map(y)); };

  std::size_t legend = 0;
  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const Series& s = plot.series[i];
    auto& o = c.raw();
    o << "<polyline fill=\"none\" stroke=\"" << color(i) << "\" stroke-width=\"2\""
      << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    bool first = true;
    for (auto [x, y] : s.points) {
      if (plot.log_y && !(y > 0)) continue;
      o << (first ? "" : " ") << num(px(x)) << ',' << num(py(y));
      first = false;
    }
    o << "\"><title>" << escape(s.name) << "</title></polyline>\n";
    for (auto [x, y] : s.points) {
      if (plot.log_y && !(y > 0)) continue;
      o << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"3\" fill=\"" << color(i) << "\"/>\n";
    }
    c.legend_entry(legend++, s.name, color(i), s.dashed);
  }
  for (std::size_t i = 0; i < plot.reference_lines.size(); ++i) {
    const auto& [name, y] = plot.reference_lines[i];
    if (plot.log_y && !(y > 0)) continue;
    const char* stroke = color(i);
    c.line(kLeft, py(y), kLeft + kPlotW, py(y), stroke, " stroke-width=\"1.5\" stroke-dasharray=\"6 4\"");
    c.legend_entry(legend++, name, stroke, true);
  }
  return c.finish();
}

std::string render(const ScatterPlot& plot) {
  std::vector<double> xs, ys;
  for (const auto& g : plot.groups)
    for (auto [x, y] : g.points) xs.push_back(x), ys.push_back(y);
  const Axis ax = make_axis(xs, false);
  const Axis ay = make_axis(ys, false);

  Canvas c;
  c.frame(plot.title, plot.x_label, plot.y_label);
  y_ticks(c, ay);
  x_ticks(c, ax, {});
  for (std::size_t i = 0; i < plot.groups.size(); ++i) {
    auto& o = c.raw();
    o << "<g fill=\"" << color(i) << "\" fill-opacity=\"0.75\"><title>" << escape(plot.groups[i].name)
      << "</title>\n";
    for (auto [x, y] : plot.groups[i].points)
      o << "<circle cx=\"" << num(kLeft + kPlotW * ax.map(x)) << "\" cy=\"" << num(kTop + kPlotH * (1 - ay.map(y)))
        << "\" r=\"3.5\"/>\n";
    o << "</g>\n";
    const double y = kTop + 10 + 18.0 * static_cast<double>(i);
    o << "<circle cx=\"" << num(kLeft + kPlotW + 24) << "\" cy=\"" << num(y) << "\" r=\"4\" fill=\"" << color(i)
      << "\"/>\n";
    c.text(kLeft + kPlotW + 42, y + 4, plot.groups[i].name, "start");
  }
  return c.finish();
}

std::string render(const BarChart& chart) {
  double hi = 0;
  for (const auto& g : chart.groups) {
    if (g.values.size() != chart.categories.size())
      throw Error(ErrorCode::ShapeError, "bar group '" + g.name + "' does not match the category count");
    for (double v : g.values) hi = std::max(hi, v);
  }
  const Axis ay{0, hi > 0 ? hi * 1.1 : 1, false};

  Canvas c;
  c.frame(chart.title, "", chart.y_label);
  y_ticks(c, ay);
  const double slot = chart.categories.empty() ? kPlotW : kPlotW / static_cast<double>(chart.categories.size());
  const double groups = static_cast<double>(std::max<std::size_t>(chart.groups.size(), 1));
  const double bar = slot * 0.8 / groups;
  for (std::size_t k = 0; k < chart.categories.size(); ++k) {
    const double x0 = kLeft + slot * static_cast<double>(k);
    c.text(x0 + slot / 2, kTop + kPlotH + 18, chart.categories[k]);
    for (std::size_t g = 0; g < chart.groups.size(); ++g) {
      const double v = chart.groups[g].values[k];
      const double h = kPlotH * ay.map(v);
      c.raw() << "<rect x=\"" << num(x0 + slot * 0.1 + bar * static_cast<double>(g)) << "\" y=\""
              << num(kTop + kPlotH - h) << "\" width=\"" << num(bar) << "\" height=\"" << num(h) << "\" fill=\""
              << color(g) << "\"><title>" << escape(chart.groups[g].name + " " + chart.categories[k]) << ": "
              << tick_label(v) << "</title></rect>\n";
    }
  }
  for (std::size_t g = 0; g < chart.groups.size(); ++g) {
    const double y = kTop + 10 + 18.0 * static_cast<double>(g);
    c.raw() << "<rect x=\"" << num(kLeft + kPlotW + 14) << "\" y=\"" << num(y - 6) << "\" width=\"18\" height=\"12\" fill=\""
            << color(g) << "\"/>\n";
    c.text(kLeft + kPlotW + 42, y + 4, chart.groups[g].name, "start");
  }
  return c.finish();
}

}  // namespace saekit::svg
