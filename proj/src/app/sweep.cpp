#include <sstream>

#include "commands.hpp"
#include "saekit/disentangle.hpp"
#include "saekit/error.hpp"
#include "saekit/rng.hpp"

namespace saekit::app {

namespace {

struct Cell {
  std::size_t layer = 0;
  std::optional<double> sparsity;  // empty for the raw baseline
  std::uint64_t seed = 0;
  fs::path dir;
  std::string label;
};

json cell_config(const SweepOptions& o, const Layer& layer, const Cell& c) {
  json doc = {{"command", "sweep"},
              {"layer", layer.name},
              {"manifest", layer.manifest_path},
              {"sparsity", c.sparsity ? json(*c.sparsity) : json(nullptr)},
              {"seed", c.seed},
              {"probe", o.train.probe_json()}};
  if (c.sparsity) doc["sae"] = o.train.sae_json();
  if (o.disentangle.factors) doc["disentangle"] = o.disentangle.to_json();
  return doc;
}

json run_cell(const SweepOptions& o, const Layer& layer, const Cell& c, const std::string& run_name, Log& log) {
  const Embeddings& e = layer.data;
  json result = {{"layer", layer.name},
                 {"sparsity", c.sparsity ? json(*c.sparsity) : json(nullptr)},
                 {"seed", c.seed},
                 {"k", nullptr},
                 {"best_epoch", nullptr},
                 {"best_val_mse", nullptr},
                 {"test_mse", nullptr}};
  const std::string created = iso_timestamp();

  Tensor train_x = e.train.x, test_x = e.test.x;
  std::optional<SaeModel> model;
  if (c.sparsity) {
    const SaeTrainConfig cfg = o.train.sae(*c.sparsity, c.seed);
    const IndexSplit split = split_indices(e.train.size(), o.train.val_frac, c.seed);
    auto [m, report] = train_sae(gather_rows(e.train.x, split.train), gather_rows(e.train.x, split.val), cfg);
    save_checkpoint(c.dir / "sae.ckpt", m, {*c.sparsity, c.seed, report.best_epoch, report.best_val_mse});
    json sae_doc = sae_report_json(report);
    sae_doc["sparsity"] = *c.sparsity;
    sae_doc["seed"] = c.seed;
    sae_doc["created"] = created;
    write_text(c.dir / "sae.json", json_text(sae_doc));
    result["k"] = report.k;
    result["best_epoch"] = report.best_epoch;
    result["best_val_mse"] = report.best_val_mse;
    if (e.test.size()) result["test_mse"] = eval_reconstruction(m, e.test.x);
    train_x = encode_batch(m, e.train.x);
    if (e.test.size()) test_x = encode_batch(m, e.test.x);
    model = std::move(m);
  }

  std::optional<LabeledSet> test_set;
  if (e.test.size()) test_set = LabeledSet{&test_x, e.test.labels};
  const auto [probe, report] = train_probe(train_x, e.train.labels, e.num_classes, o.train.probe(c.seed), test_set);
  json probe_doc = probe_report_json(report);
  probe_doc["layer"] = layer.name;
  probe_doc["sparsity"] = result["sparsity"];
  probe_doc["seed"] = c.seed;
  probe_doc["created"] = created;
  write_text(c.dir / "probe.json", json_text(probe_doc));
  result["probe_val_acc"] = report.best_val_accuracy;
  result["probe_test_acc"] = report.test_accuracy ? json(*report.test_accuracy) : json(nullptr);
  result["n_train"] = report.n_train + report.n_val;
  result["n_test"] = report.n_test;

  result["top10_r2_mean"] = result["top10_r2_std"] = nullptr;
  result["top10_completeness_mean"] = result["top10_completeness_std"] = nullptr;
  if (o.disentangle.factors) {
    CodePool pool = all_rows(e);
    if (model) pool.x = encode_batch(*model, pool.x);
    const DisentangleReport rep = write_disentanglement(c.dir, pool.x, pool.ids, o.disentangle, c.seed,
                                                        run_name + "/" + c.label, layer.name, c.sparsity, log);
    result["top10_r2_mean"] = rep.top_r2.mean;
    result["top10_r2_std"] = rep.top_r2.std;
    result["top10_completeness_mean"] = rep.top_completeness.mean;
    result["top10_completeness_std"] = rep.top_completeness.std;
  }
  return result;
}

std::string csv_num(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  return format_double(v.get<double>());
}

}  // namespace

int cmd_sweep(const SweepOptions& o, std::ostream& out, Log& log) {
  const std::vector<double> grid = parse_sparsities(o.sparsities);
  for (double s : grid) sparsity_to_k(s, o.train.latent);
  if (!o.disentangle.factors && o.disentangle.family_map)
    throw Error(ErrorCode::InvalidInput, "--family-map needs --factors");
  if (o.disentangle.factors) LambdaPolicy::parse(o.disentangle.lam);
  const auto layers = load_layers(o.manifests, o.layers);

  const fs::path root(o.out);
  const std::string run_name = fs::absolute(root).lexically_normal().filename().string();
  std::vector<std::string> names;
  for (const auto& l : layers) names.push_back(l.name);
  json top = {{"command", "sweep"},
              {"manifests", o.manifests},
              {"layers", names},
              {"sparsities", grid},
              {"baseline", o.baseline},
              {"seed", o.seed},
              {"sae", o.train.sae_json()},
              {"probe", o.train.probe_json()},
              {"disentangle", o.disentangle.factors ? o.disentangle.to_json() : json(nullptr)}};

  std::vector<Cell> cells;
  const std::size_t per_layer = grid.size() + 1;
  for (std::size_t li = 0; li < layers.size(); ++li)
    for (std::size_t j = 0; j < per_layer; ++j) {
      if (j == 0 && !o.baseline) continue;
      Cell c;
      c.layer = li;
      if (j > 0) c.sparsity = grid[j - 1];
      c.seed = derive_seed(o.seed, li * per_layer + j);
      c.label = layers[li].name + "/" + (c.sparsity ? sparsity_label(*c.sparsity) : std::string("raw"));
      c.dir = root / c.label;
      cells.push_back(std::move(c));
    }

  // A cell is complete once result.json exists; completed cells must have been
  // produced by the same settings.
  std::vector<std::string> configs(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    configs[i] = json_text(cell_config(o, layers[cells[i].layer], cells[i]));
    if (fs::exists(cells[i].dir / "result.json") && fs::exists(cells[i].dir / "config.json") &&
        read_text(cells[i].dir / "config.json") != configs[i])
      throw Error(ErrorCode::InvalidInput, "cell " + cells[i].label +
                                               " was produced with different settings; use a fresh --out");
  }
  write_text(root / "config.json", json_text(top));

  std::vector<json> results(cells.size());
  std::vector<std::string> failures(cells.size());
  std::vector<int> codes(cells.size(), kExitOk);
  parallel_for(cells.size(), o.jobs, [&](std::size_t i) {
    const Cell& c = cells[i];
    const fs::path done = c.dir / "result.json";
    if (fs::exists(done)) {
      results[i] = json::parse(read_text(done));
      log.info("skip " + c.label + " (complete)");
      return;
    }
    try {
      fs::remove(c.dir / "error.txt");
      write_text(c.dir / "config.json", configs[i]);
      log.info("run " + c.label);
      results[i] = run_cell(o, layers[c.layer], c, run_name, log);
      write_text(done, json_text(results[i]));
    } catch (const std::exception& e) {
      failures[i] = e.what();
      codes[i] = exit_code_for(e);
      write_text(c.dir / "error.txt", failures[i] + "\n");
      log.warn("cell " + c.label + " failed: " + failures[i]);
    }
  });

  std::ostringstream sweep_csv, probe_csv;
  sweep_csv << "layer,sparsity,k,best_val_mse,test_mse,probe_test_acc\n";
  probe_csv << "layer,sparsity,val_acc,test_acc,n_train,n_test,seed\n";
  int status = kExitOk;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!failures[i].empty()) {
      ++failed;
      if (status == kExitOk) status = codes[i];
      continue;
    }
    const json& r = results[i];
    const std::string s = cells[i].sparsity ? sparsity_label(*cells[i].sparsity) : "";
    if (cells[i].sparsity)
      sweep_csv << layers[cells[i].layer].name << ',' << s << ',' << csv_num(r["k"]) << ','
                << csv_num(r["best_val_mse"]) << ',' << csv_num(r["test_mse"]) << ',' << csv_num(r["probe_test_acc"])
                << '\n';
    probe_csv << layers[cells[i].layer].name << ',' << s << ',' << csv_num(r["probe_val_acc"]) << ','
              << csv_num(r["probe_test_acc"]) << ',' << csv_num(r["n_train"]) << ',' << csv_num(r["n_test"]) << ','
              << cells[i].seed << '\n';
  }
  write_text(root / "sweep.csv", sweep_csv.str());
  write_text(root / "probe.csv", probe_csv.str());
  out << cells.size() - failed << " of " << cells.size() << " cells complete\n";
  return status;
}

}  // namespace saekit::app
