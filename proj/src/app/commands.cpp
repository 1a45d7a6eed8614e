#include "commands.hpp"

#include <fstream>
#include <sstream>

#include "saekit/atns.hpp"
#include "saekit/disentangle.hpp"
#include "saekit/error.hpp"
#include "saekit/rng.hpp"

namespace saekit::app {

SaeTrainConfig TrainFlags::sae(double sparsity, std::uint64_t seed) const {
  SaeTrainConfig c;
  c.sparsity = sparsity;
  c.n_latent = latent;
  c.lr = lr;
  c.batch_size = batch;
  c.max_epochs = epochs;
  c.patience = patience;
  c.seed = seed;
  return c;
}

ProbeTrainConfig TrainFlags::probe(std::uint64_t seed) const {
  ProbeTrainConfig c;
  c.val_frac = val_frac;
  c.seed = seed;
  c.lr = lr;
  c.batch_size = batch;
  c.max_epochs = probe_epochs;
  c.patience = probe_patience;
  return c;
}

json TrainFlags::sae_json() const {
  return {{"n_latent", latent}, {"lr", lr}, {"batch_size", batch}, {"max_epochs", epochs},
          {"patience", patience}, {"val_frac", val_frac}};
}

json TrainFlags::probe_json() const {
  return {{"lr", lr}, {"batch_size", batch}, {"max_epochs", probe_epochs}, {"patience", probe_patience},
          {"val_frac", val_frac}};
}

DisentangleConfig DisentangleFlags::config(std::uint64_t seed) const {
  DisentangleConfig c;
  c.lam = LambdaPolicy::parse(lam);
  c.eval_frac = eval_frac;
  c.in_sample = in_sample;
  c.seed = seed;
  c.knn_k = knn_k;
  return c;
}

json DisentangleFlags::to_json() const {
  return {{"factors", factors ? json(*factors) : json(nullptr)},
          {"family_map", family_map ? json(*family_map) : json(nullptr)},
          {"lam", lam},
          {"eval_frac", eval_frac},
          {"in_sample", in_sample},
          {"knn_k", knn_k}};
}

// ---------------------------------------------------------------- probe

int cmd_probe(const ProbeOptions& o, std::ostream& out, Log& log) {
  const auto layers = load_layers(o.manifests, o.layers);
  const fs::path dir(o.out);
  json config = {{"command", "probe"},
                 {"manifests", o.manifests},
                 {"layers", layer_names(o.manifests, o.layers)},
                 {"seed", o.seed},
                 {"probe", o.train.probe_json()}};
  write_text(dir / "config.json", json_text(config));

  std::vector<LayerInput> inputs;
  for (const auto& l : layers) inputs.push_back({l.name, &l.data});

  struct Outcome {
    ProbeReport report;
    std::uint64_t seed = 0;
  };
  std::vector<Outcome> outcomes(layers.size());
  parallel_for(layers.size(), o.jobs, [&](std::size_t i) {
    const LabeledMatrix& train = layers[i].data.train;
    const LabeledMatrix& test = layers[i].data.test;
    const std::uint64_t seed = derive_seed(o.seed, i);
    std::optional<LabeledSet> test_set;
    if (test.size()) test_set = LabeledSet{&test.x, test.labels};
    auto [model, report] =
        train_probe(train.x, train.labels, layers[i].data.num_classes, o.train.probe(seed), test_set);
    outcomes[i] = {std::move(report), seed};
    log.info("probe " + layers[i].name + ": val " + format_double(outcomes[i].report.best_val_accuracy));
  });

  const std::string created = iso_timestamp();
  std::ostringstream csv;
  csv << "layer,sparsity,val_acc,test_acc,n_train,n_test,seed\n";
  json ranked = json::array();
  std::vector<std::size_t> order(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& r = outcomes[i].report;
    json doc = probe_report_json(r);
    doc["layer"] = layers[i].name;
    doc["sparsity"] = nullptr;
    doc["seed"] = outcomes[i].seed;
    doc["created"] = created;
    write_text(dir / layers[i].name / "probe.json", json_text(doc));
    csv << layers[i].name << ",," << format_double(r.best_val_accuracy) << ','
        << (r.test_accuracy ? format_double(*r.test_accuracy) : "") << ',' << r.n_train << ',' << r.n_test << ','
        << outcomes[i].seed << '\n';
    order[i] = i;
  }
  write_text(dir / "probe.csv", csv.str());

  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return outcomes[a].report.test_accuracy.value_or(outcomes[a].report.best_val_accuracy) >
           outcomes[b].report.test_accuracy.value_or(outcomes[b].report.best_val_accuracy);
  });
  for (std::size_t i : order)
    ranked.push_back({{"layer", layers[i].name},
                      {"val_acc", outcomes[i].report.best_val_accuracy},
                      {"test_acc", outcomes[i].report.test_accuracy ? json(*outcomes[i].report.test_accuracy)
                                                                    : json(nullptr)}});
  write_text(dir / "layers.json", json_text({{"ranked", ranked}, {"selected", layers[order.front()].name}}));
  out << "selected layer: " << layers[order.front()].name << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- sae-train / sae-eval

int cmd_sae_train(const SaeTrainOptions& o, std::ostream& out, Log& log) {
  const auto layers = load_layers({o.manifest}, {});
  const LabeledMatrix& train = layers[0].data.train;
  const fs::path dir(o.out);
  const SaeTrainConfig cfg = o.train.sae(o.sparsity, o.seed);
  sparsity_to_k(cfg.sparsity, cfg.n_latent);  // reject before writing anything

  json config = {{"command", "sae-train"}, {"manifest", o.manifest}, {"seed", o.seed},
                 {"sparsity", o.sparsity}, {"sae", o.train.sae_json()}};
  write_text(dir / "config.json", json_text(config));

  const IndexSplit split = split_indices(train.size(), o.train.val_frac, o.seed);
  const Tensor fit = gather_rows(train.x, split.train);
  const Tensor val = gather_rows(train.x, split.val);
  log.info("training SAE: " + std::to_string(fit.rows()) + " rows, N=" + std::to_string(cfg.n_latent) +
           ", k=" + std::to_string(sparsity_to_k(cfg.sparsity, cfg.n_latent)));
  const auto [model, report] = train_sae(fit, val, cfg);
  save_checkpoint(dir / "sae.ckpt", model, {o.sparsity, o.seed, report.best_epoch, report.best_val_mse});

  json doc = sae_report_json(report);
  doc["sparsity"] = o.sparsity;
  doc["seed"] = o.seed;
  doc["created"] = iso_timestamp();
  write_text(dir / "sae.json", json_text(doc));
  out << "best_val_mse " << format_double(report.best_val_mse) << " at epoch " << report.best_epoch << '\n';
  return kExitOk;
}

int cmd_sae_eval(const SaeEvalOptions& o, std::ostream& out, Log&) {
  if (!fs::exists(o.checkpoint)) throw Error(ErrorCode::Io, "checkpoint not found: " + o.checkpoint);
  const auto [model, info] = load_checkpoint(o.checkpoint);
  const auto layers = load_layers({o.manifest}, {});
  const Embeddings& e = layers[0].data;
  if (e.train.size() && e.train.x.cols() != model.d_in)
    throw Error(ErrorCode::ShapeError, "checkpoint expects width " + std::to_string(model.d_in));

  json doc = {{"checkpoint", o.checkpoint}, {"manifest", o.manifest}, {"k", model.k},
              {"n_latent", model.n_latent}, {"sparsity", info.sparsity}};
  doc["train_mse"] = e.train.size() ? json(eval_reconstruction(model, e.train.x)) : json(nullptr);
  doc["test_mse"] = e.test.size() ? json(eval_reconstruction(model, e.test.x)) : json(nullptr);
  const std::string text = json_text(doc);
  out << text;
  if (o.out) {
    const fs::path dir(*o.out);
    write_text(dir / "sae_eval.json", text);
    if (o.write_codes) {
      const CodePool pool = all_rows(e);
      save_tensor(dir / "codes.atns", encode_batch(model, pool.x));
      std::string ids;
      for (const auto& id : pool.ids) ids += id + "\n";
      write_text(dir / "codes_ids.txt", ids);
    }
  } else if (o.write_codes) {
    throw Error(ErrorCode::InvalidInput, "--codes requires --out");
  }
  return kExitOk;
}

// ---------------------------------------------------------------- disentangle

DisentangleReport write_disentanglement(const fs::path& dir, const Tensor& codes, const std::vector<std::string>& ids,
                                        const DisentangleFlags& flags, std::uint64_t seed, const std::string& run_id,
                                        const std::string& layer, std::optional<double> sparsity, Log& log) {
  if (!flags.factors) throw Error(ErrorCode::InvalidInput, "--factors is required");
  if (!fs::exists(*flags.factors)) throw Error(ErrorCode::Io, "factor table not found: " + *flags.factors);
  const FactorTable factors = load_factor_csv(*flags.factors);
  const FamilyMap families = family_map_or_default(flags.family_map);
  DisentangleResult res = run_disentanglement(codes, ids, factors, families, flags.config(seed));
  res.report.run_id = run_id;
  res.report.layer = layer;
  res.report.sparsity = sparsity;
  for (const auto& s : res.report.skipped) log.warn(run_id + ": skipped factor '" + s.name + "' (" + s.reason + ")");
  if (!res.report.unmapped_factors.empty())
    log.warn(run_id + ": " + std::to_string(res.report.unmapped_factors.size()) +
             " factor(s) have no family and count as 'other'");
  write_text(dir / "disentangle.json", report_to_json(res.report, iso_timestamp()));
  save_tensor(dir / "importance.atns", res.importance);
  return res.report;
}

namespace {

std::vector<std::string> read_ids(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

}  // namespace

int cmd_disentangle(const DisentangleOptions& o, std::ostream& out, Log& log) {
  Tensor codes;
  std::vector<std::string> ids;
  std::optional<double> sparsity;
  std::string layer = o.layer;
  if (o.codes) {
    if (o.manifest || o.checkpoint) throw Error(ErrorCode::InvalidInput, "use either --codes or --manifest");
    if (!o.ids) throw Error(ErrorCode::InvalidInput, "--codes requires --ids");
    if (!fs::exists(*o.codes)) throw Error(ErrorCode::Io, "codes not found: " + *o.codes);
    if (!fs::exists(*o.ids)) throw Error(ErrorCode::Io, "id list not found: " + *o.ids);
    codes = load_tensor(*o.codes);
    ids = read_ids(*o.ids);
    if (layer.empty()) layer = fs::path(*o.codes).stem().string();
  } else {
    if (!o.manifest) throw Error(ErrorCode::InvalidInput, "one of --codes or --manifest is required");
    const auto layers = load_layers({*o.manifest}, {});
    CodePool pool = all_rows(layers[0].data);
    ids = std::move(pool.ids);
    codes = std::move(pool.x);
    if (layer.empty()) layer = layers[0].name;
    if (o.checkpoint) {
      if (!fs::exists(*o.checkpoint)) throw Error(ErrorCode::Io, "checkpoint not found: " + *o.checkpoint);
      const auto [model, info] = load_checkpoint(*o.checkpoint);
      codes = encode_batch(model, codes);
      sparsity = info.sparsity;
    }
  }
  require_matrix(codes, "codes");

  const fs::path dir(o.out);
  json config = {{"command", "disentangle"},
                 {"manifest", o.manifest ? json(*o.manifest) : json(nullptr)},
                 {"checkpoint", o.checkpoint ? json(*o.checkpoint) : json(nullptr)},
                 {"codes", o.codes ? json(*o.codes) : json(nullptr)},
                 {"ids", o.ids ? json(*o.ids) : json(nullptr)},
                 {"layer", layer},
                 {"seed", o.seed},
                 {"disentangle", o.flags.to_json()}};
  write_text(dir / "config.json", json_text(config));

  const std::string run_id = o.run_id.value_or(dir.filename().string());
  const DisentangleReport rep =
      write_disentanglement(dir, codes, ids, o.flags, o.seed, run_id, layer, sparsity, log);
  out << "factors " << rep.factors.size() << ", top-" << rep.top_r2.items.size() << " R2 mean "
      << format_double(rep.top_r2.mean) << ", completeness mean " << format_double(rep.top_completeness.mean)
      << '\n';
  return kExitOk;
}

}  // namespace saekit::app
