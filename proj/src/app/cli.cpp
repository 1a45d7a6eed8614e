#include <CLI11.hpp>

#include "commands.hpp"
#include "saekit/app.hpp"
#include "saekit/error.hpp"

namespace saekit {

int exit_code_for(const std::exception& e) noexcept {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->code()) {
      case ErrorCode::TrainingDiverged:
        return kExitFailure;
      default:
        return kExitInvalidInput;
    }
  }
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return kExitInvalidInput;
  return kExitFailure;
}

namespace {

using namespace app;

void add_train_flags(CLI::App* cmd, TrainFlags& t, bool sae) {
  cmd->add_option("--lr", t.lr, "Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--batch", t.batch, "minibatch size")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--val-frac", t.val_frac, "validation fraction of the train split")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  if (sae) {
    cmd->add_option("--latent", t.latent, "SAE latent width N")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--epochs", t.epochs, "SAE max epochs")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--patience", t.patience, "SAE early-stopping patience")->capture_default_str();
  }
}

void add_probe_flags(CLI::App* cmd, TrainFlags& t, bool prefixed) {
  cmd->add_option(prefixed ? "--probe-epochs" : "--epochs", t.probe_epochs, "probe max epochs")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option(prefixed ? "--probe-patience" : "--patience", t.probe_patience, "probe early-stopping patience")
      ->capture_default_str();
}

void add_disentangle_flags(CLI::App* cmd, DisentangleFlags& d, bool factors_required) {
  auto* f = cmd->add_option("--factors", d.factors, "factor table CSV");
  if (factors_required) f->required();
  cmd->add_option("--family-map", d.family_map, "factor family map JSON (default: built-in eGeMAPS map)");
  cmd->add_option("--lam", d.lam, "lasso strength, e.g. 0.01*lmax or 0.05")->capture_default_str();
  cmd->add_option("--eval-frac", d.eval_frac, "held-out fraction for R2")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_flag("--in-sample", d.in_sample, "fit and score R2 on all rows");
  cmd->add_option("--knn-k", d.knn_k, "neighbour count of the entropy estimator")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse autoencoder probing and disentanglement toolkit", "saekit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "saekit 0.1.0");

  ProbeOptions probe;
  auto* c_probe = app.add_subcommand("probe", "linear probes on pooled layer embeddings");
  c_probe->add_option("--manifest", probe.manifests, "dataset manifest, once per layer")->required();
  c_probe->add_option("--layer", probe.layers, "layer names, one per manifest");
  c_probe->add_option("--out", probe.out, "output directory")->required();
  c_probe->add_option("--seed", probe.seed)->capture_default_str();
  c_probe->add_option("--jobs", probe.jobs, "parallel layers")->capture_default_str()->check(CLI::PositiveNumber);
  add_train_flags(c_probe, probe.train, false);
  add_probe_flags(c_probe, probe.train, false);

  SaeTrainOptions sae_train;
  auto* c_train = app.add_subcommand("sae-train", "train one TopK sparse autoencoder");
  c_train->add_option("--manifest", sae_train.manifest)->required();
  c_train->add_option("--out", sae_train.out, "output directory")->required();
  c_train->add_option("--seed", sae_train.seed)->capture_default_str();
  c_train->add_option("--sparsity", sae_train.sparsity, "fraction of inactive latents")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  add_train_flags(c_train, sae_train.train, true);

  SaeEvalOptions sae_eval;
  auto* c_eval = app.add_subcommand("sae-eval", "reconstruction error of a trained SAE");
  c_eval->add_option("--checkpoint", sae_eval.checkpoint)->required();
  c_eval->add_option("--manifest", sae_eval.manifest)->required();
  c_eval->add_option("--out", sae_eval.out, "directory for sae_eval.json");
  c_eval->add_flag("--codes", sae_eval.write_codes, "also write codes.atns and codes_ids.txt");

  SweepOptions sweep;
  auto* c_sweep = app.add_subcommand("sweep", "SAE and probe grid over layers and sparsity levels");
  c_sweep->add_option("--manifest", sweep.manifests, "dataset manifest, once per layer")->required();
  c_sweep->add_option("--layer", sweep.layers, "layer names, one per manifest");
  c_sweep->add_option("--out", sweep.out, "run directory")->required();
  c_sweep->add_option("--seed", sweep.seed)->capture_default_str();
  c_sweep->add_option("--jobs", sweep.jobs, "parallel cells")->capture_default_str()->check(CLI::PositiveNumber);
  c_sweep->add_option("--sparsities", sweep.sparsities, "comma-separated grid")->capture_default_str();
  bool no_baseline = false;
  c_sweep->add_flag("--no-baseline", no_baseline, "skip the raw-representation cells");
  add_train_flags(c_sweep, sweep.train, true);
  add_probe_flags(c_sweep, sweep.train, true);
  add_disentangle_flags(c_sweep, sweep.disentangle, false);

  DisentangleOptions dis;
  auto* c_dis = app.add_subcommand("disentangle", "lasso factor regressions, completeness and entropy");
  c_dis->add_option("--manifest", dis.manifest, "embeddings to analyse (all splits)");
  c_dis->add_option("--checkpoint", dis.checkpoint, "encode the manifest embeddings with this SAE");
  c_dis->add_option("--codes", dis.codes, "precomputed codes as ATNS [M, P]");
  c_dis->add_option("--ids", dis.ids, "row ids for --codes, one per line");
  c_dis->add_option("--layer", dis.layer, "layer label for the report");
  c_dis->add_option("--run-id", dis.run_id, "run id for the report (default: output directory name)");
  c_dis->add_option("--out", dis.out, "output directory")->required();
  c_dis->add_option("--seed", dis.seed)->capture_default_str();
  add_disentangle_flags(c_dis, dis.flags, true);

  ReportOptions report;
  auto* c_report = app.add_subcommand("report", "summary tables and SVG figures for a run tree");
  c_report->add_option("--runs,runs", report.runs, "run directory written by sweep")->required();
  c_report->add_option("--out", report.out, "output directory (default: <runs>/report)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }
  sweep.baseline = !no_baseline;

  Log log(err);
  try {
    if (c_probe->parsed()) return cmd_probe(probe, out, log);
    if (c_train->parsed()) return cmd_sae_train(sae_train, out, log);
    if (c_eval->parsed()) return cmd_sae_eval(sae_eval, out, log);
    if (c_sweep->parsed()) return cmd_sweep(sweep, out, log);
    if (c_dis->parsed()) return cmd_disentangle(dis, out, log);
    if (c_report->parsed()) return cmd_report(report, out, log);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitInvalidInput;
}

}  // namespace saekit
