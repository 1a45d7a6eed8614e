#include <algorithm>
#include <cmath>
#include <functional>
#include <tuple>
#include <map>
#include <sstream>

#include "commands.hpp"
#include "saekit/disentangle.hpp"
#include "saekit/error.hpp"
#include "saekit/svg.hpp"

namespace saekit::app {

namespace {

struct CellRecord {
  std::string layer;
  std::optional<double> sparsity;
  json result;
  std::optional<DisentangleReport> disentangle;
};

std::optional<double> number(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

std::string cell_num(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return "";
  if (j[key].is_number_unsigned()) return std::to_string(j[key].get<std::uint64_t>());
  return format_double(j[key].get<double>());
}

std::optional<CellRecord> read_cell(const fs::path& dir) {
  if (!fs::exists(dir / "result.json")) return std::nullopt;
  CellRecord rec;
  rec.result = json::parse(read_text(dir / "result.json"));
  rec.layer = rec.result.at("layer").get<std::string>();
  rec.sparsity = number(rec.result, "sparsity");
  if (fs::exists(dir / "disentangle.json")) rec.disentangle = report_from_json(read_text(dir / "disentangle.json"));
  return rec;
}

// Layer order and cell directories: taken from the sweep config when present,
// otherwise from a sorted directory scan.
std::vector<CellRecord> collect(const fs::path& root, std::vector<std::string>& layer_order) {
  std::vector<fs::path> dirs;
  if (fs::exists(root / "config.json")) {
    const json cfg = json::parse(read_text(root / "config.json"));
    if (cfg.contains("layers") && cfg.contains("sparsities")) {
      for (const auto& l : cfg["layers"]) {
        const std::string name = l.get<std::string>();
        layer_order.push_back(name);
        dirs.push_back(root / name / "raw");
        for (const auto& s : cfg["sparsities"]) dirs.push_back(root / name / sparsity_label(s.get<double>()));
      }
    }
  }
  if (dirs.empty()) {
    std::vector<fs::path> layer_dirs;
    for (const auto& entry : fs::directory_iterator(root))
      if (entry.is_directory()) layer_dirs.push_back(entry.path());
    std::sort(layer_dirs.begin(), layer_dirs.end());
    for (const auto& ld : layer_dirs) {
      std::vector<fs::path> sub;
      for (const auto& entry : fs::directory_iterator(ld))
        if (entry.is_directory()) sub.push_back(entry.path());
      std::sort(sub.begin(), sub.end());
      dirs.insert(dirs.end(), sub.begin(), sub.end());
    }
  }
  std::vector<CellRecord> cells;
  for (const auto& d : dirs)
    if (auto rec = read_cell(d)) {
      if (std::find(layer_order.begin(), layer_order.end(), rec->layer) == layer_order.end())
        layer_order.push_back(rec->layer);
      cells.push_back(std::move(*rec));
    }
  std::stable_sort(cells.begin(), cells.end(), [&](const CellRecord& a, const CellRecord& b) {
    const auto ia = std::find(layer_order.begin(), layer_order.end(), a.layer) - layer_order.begin();
    const auto ib = std::find(layer_order.begin(), layer_order.end(), b.layer) - layer_order.begin();
    if (ia != ib) return ia < ib;
    if (a.sparsity.has_value() != b.sparsity.has_value()) return !a.sparsity.has_value();
    return a.sparsity.value_or(0) < b.sparsity.value_or(0);
  });
  return cells;
}

// One polyline per layer of metric(cell) against sparsity, plus a dashed
// reference line per layer from its raw baseline.
svg::LinePlot by_sparsity(const std::vector<CellRecord>& cells, const std::vector<std::string>& layers,
                          const std::function<std::optional<double>(const CellRecord&)>& metric) {
  svg::LinePlot plot;
  plot.x_label = "sparsity";
  for (const auto& layer : layers) {
    svg::Series s{layer, {}, false};
    for (const auto& c : cells) {
      if (c.layer != layer) continue;
      const auto v = metric(c);
      if (!v) continue;
      if (c.sparsity)
        s.points.emplace_back(*c.sparsity, *v);
      else
        plot.reference_lines.emplace_back(layer + " (raw)", *v);
    }
    if (!s.points.empty()) plot.series.push_back(std::move(s));
  }
  return plot;
}

}  // namespace

int cmd_report(const ReportOptions& o, std::ostream& out, Log& log) {
  const fs::path root(o.runs);
  if (!fs::is_directory(root)) throw Error(ErrorCode::Io, "run tree not found: " + o.runs);
  std::vector<std::string> layers;
  const std::vector<CellRecord> cells = collect(root, layers);
  if (cells.empty()) throw Error(ErrorCode::InvalidInput, "no completed cells under " + o.runs);
  const fs::path dir = o.out ? fs::path(*o.out) : root / "report";

  const char* header =
      "layer,sparsity,k,best_val_mse,test_mse,probe_val_acc,probe_test_acc,top10_r2_mean,top10_r2_std,"
      "top10_completeness_mean,top10_completeness_std\n";
  std::ostringstream summary, baselines;
  summary << header;
  baselines << header;
  for (const auto& c : cells) {
    std::ostringstream& o2 = c.sparsity ? summary : baselines;
    const json& r = c.result;
    o2 << c.layer << ',' << (c.sparsity ? sparsity_label(*c.sparsity) : "") << ',' << cell_num(r, "k") << ','
       << cell_num(r, "best_val_mse") << ',' << cell_num(r, "test_mse") << ',' << cell_num(r, "probe_val_acc") << ','
       << cell_num(r, "probe_test_acc") << ',' << cell_num(r, "top10_r2_mean") << ',' << cell_num(r, "top10_r2_std")
       << ',' << cell_num(r, "top10_completeness_mean") << ',' << cell_num(r, "top10_completeness_std") << '\n';
  }
  write_text(dir / "summary.csv", summary.str());
  write_text(dir / "baselines.csv", baselines.str());
  std::vector<std::string> written{"summary.csv", "baselines.csv"};

  auto acc = [](const CellRecord& c) { return number(c.result, "probe_test_acc"); };

  {  // accuracy vs layer: raw baseline plus one series per sparsity level
    svg::LinePlot plot;
    plot.title = "Probe accuracy by layer";
    plot.x_label = "layer";
    plot.y_label = "test accuracy";
    plot.x_ticks = layers;
    std::map<std::optional<double>, svg::Series> series;
    for (const auto& c : cells) {
      const auto v = acc(c);
      if (!v) continue;
      auto& s = series[c.sparsity];
      s.name = c.sparsity ? "sparsity " + sparsity_label(*c.sparsity) : "raw";
      const auto idx = std::find(layers.begin(), layers.end(), c.layer) - layers.begin();
      s.points.emplace_back(static_cast<double>(idx), *v);
    }
    for (auto& [key, s] : series) plot.series.push_back(std::move(s));
    write_text(dir / "accuracy_vs_layer.svg", svg::render(plot));
    written.push_back("accuracy_vs_layer.svg");
  }
  {
    svg::LinePlot plot = by_sparsity(cells, layers, acc);
    plot.title = "Probe accuracy on SAE codes";
    plot.y_label = "test accuracy";
    write_text(dir / "accuracy_vs_sparsity.svg", svg::render(plot));
    written.push_back("accuracy_vs_sparsity.svg");
  }
  {
    svg::LinePlot plot = by_sparsity(cells, layers, [](const CellRecord& c) {
      return c.sparsity ? number(c.result, "test_mse") : std::nullopt;
    });
    plot.title = "Reconstruction error";
    plot.y_label = "test MSE";
    std::vector<double> values;
    for (const auto& s : plot.series)
      for (auto [x, y] : s.points) values.push_back(y);
    plot.log_y = svg::wants_log_scale(values);
    write_text(dir / "mse_vs_sparsity.svg", svg::render(plot));
    written.push_back("mse_vs_sparsity.svg");
  }

  const bool any_disentangle =
      std::any_of(cells.begin(), cells.end(), [](const CellRecord& c) { return c.disentangle.has_value(); });
  if (any_disentangle) {
    svg::ScatterPlot scatter;
    scatter.title = "Completeness vs factor entropy";
    scatter.x_label = "entropy (nats)";
    scatter.y_label = "completeness";
    for (const auto& c : cells) {
      if (!c.disentangle) continue;
      svg::ScatterGroup g{c.layer + " " + (c.sparsity ? sparsity_label(*c.sparsity) : std::string("raw")), {}};
      for (const auto& f : c.disentangle->factors) g.points.emplace_back(f.entropy_nats, f.completeness);
      scatter.groups.push_back(std::move(g));
    }
    write_text(dir / "completeness_vs_entropy.svg", svg::render(scatter));
    written.push_back("completeness_vs_entropy.svg");

    svg::BarChart bars;
    bars.title = "Families among the top-10 factors by R2 (summed over sparsity levels)";
    bars.y_label = "count";
    for (auto f : factor_families()) bars.categories.emplace_back(f);
    bars.categories.emplace_back(kOtherFamily);
    for (const auto& layer : layers) {
      svg::BarGroup g{layer, std::vector<double>(bars.categories.size(), 0.0)};
      bool any = false;
      for (const auto& c : cells) {
        if (c.layer != layer || !c.sparsity || !c.disentangle) continue;
        any = true;
        for (const auto& [family, n] : c.disentangle->family_counts) {
          const auto it = std::find(bars.categories.begin(), bars.categories.end(), family);
          if (it != bars.categories.end()) g.values[it - bars.categories.begin()] += static_cast<double>(n);
        }
      }
      if (any) bars.groups.push_back(std::move(g));
    }
    write_text(dir / "family_counts.svg", svg::render(bars));
    written.push_back("family_counts.svg");

    for (auto [key, title, file] :
         {std::tuple{"top10_r2_mean", "Mean R2 of the top-10 factors", "top10_r2_vs_sparsity.svg"},
          std::tuple{"top10_completeness_mean", "Mean completeness of the top-10 factors",
                     "top10_completeness_vs_sparsity.svg"}}) {
      svg::LinePlot plot = by_sparsity(cells, layers, [key = key](const CellRecord& c) { return number(c.result, key); });
      plot.title = title;
      plot.y_label = key;
      write_text(dir / file, svg::render(plot));
      written.push_back(file);
    }
  } else {
    log.info("no disentanglement results; skipping factor plots");
  }

  for (const auto& f : written) out << (dir / f).string() << '\n';
  return kExitOk;
}

}  // namespace saekit::app
