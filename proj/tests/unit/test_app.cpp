#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "../support/synthetic.hpp"
#include "../support/xml_check.hpp"
#include "saekit/app.hpp"
#include "saekit/factors.hpp"
#include "saekit/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = saekit::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_timestamp(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.find("\"created\":") == std::string::npos) out += line + "\n";
  return out;
}

// Relative path -> contents (timestamp lines removed) for every file under dir.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = without_timestamp(slurp(e.path()));
  return files;
}

std::size_t line_count(const std::string& text) { return std::count(text.begin(), text.end(), '\n'); }

struct Fixture {
  fs::path root;
  fs::path manifest_a, manifest_b, factors;
  synth::Corpus corpus;
};

// Two layers over the same utterances: layer_a carries the labels, layer_b is
// a second corpus draw whose labels are unrelated to its embeddings' class atoms.
const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture fx;
    fx.root = fs::temp_directory_path() / "saekit_test_app";
    fs::remove_all(fx.root);
    synth::CorpusSpec spec;
    spec.samples = 300;
    spec.test_samples = 100;
    spec.dim = 16;
    spec.n_atoms = 24;
    spec.num_classes = 3;
    spec.num_factors = 4;
    spec.active_prob = 0.02;
    spec.seed = 5;
    fx.corpus = synth::make_corpus(spec);
    fx.manifest_a = synth::write_fixture(fx.corpus, fx.root / "layer_a");

    spec.seed = 6;
    synth::Corpus noise = synth::make_corpus(spec);
    noise.ids = fx.corpus.ids;
    noise.labels = fx.corpus.labels;
    fx.manifest_b = synth::write_fixture(noise, fx.root / "layer_b");

    // Test-split factors plus one exactly linear in the layer_a embedding.
    saekit::FactorTable t = synth::test_factors(fx.corpus);
    saekit::FactorTable planted;
    planted.ids = t.ids;
    planted.names = t.names;
    planted.names.push_back("planted");
    for (std::size_t r = 0, row = 0; r < fx.corpus.ids.size(); ++r) {
      if (!fx.corpus.is_test[r]) continue;
      for (std::size_t c = 0; c < t.num_factors(); ++c) planted.values.push_back(t.at(row, c));
      planted.values.push_back(1.0 + 3.0 * fx.corpus.x(r, 2) - fx.corpus.x(r, 5));
      ++row;
    }
    fx.factors = fx.root / "factors.csv";
    saekit::save_factor_csv(fx.factors, planted);
    return fx;
  }();
  return f;
}

}  // namespace

TEST_CASE("cli basics") {
  CHECK(cli({}).code == saekit::kExitInvalidInput);
  CHECK(cli({"--help"}).code == saekit::kExitOk);
  CHECK(cli({"frobnicate"}).code == saekit::kExitInvalidInput);
  CHECK(cli({"probe", "--out", "x"}).code == saekit::kExitInvalidInput);

  const Run missing = cli({"probe", "--manifest", "/nonexistent/m.json", "--out", "/tmp/saekit_never"});
  CHECK(missing.code == saekit::kExitInvalidInput);
  CHECK(missing.err.find("/nonexistent/m.json") != std::string::npos);
}

TEST_CASE("probe command") {
  const Fixture& fx = fixture();
  const fs::path out1 = fx.root / "probe1", out2 = fx.root / "probe2";
  const std::vector<std::string> base{"probe", "--manifest", fx.manifest_a.string(), "--manifest",
                                      fx.manifest_b.string(), "--seed", "3", "--epochs", "150"};
  auto args1 = base, args2 = base;
  args1.insert(args1.end(), {"--out", out1.string()});
  args2.insert(args2.end(), {"--out", out2.string(), "--jobs", "2"});
  const Run r1 = cli(args1);
  REQUIRE_MESSAGE(r1.code == 0, r1.err);
  REQUIRE(cli(args2).code == 0);

  const json a = json::parse(slurp(out1 / "layer_a" / "probe.json"));
  CHECK(a["test_accuracy"].get<double>() == 1.0);
  CHECK(a["best_val_accuracy"].get<double>() == 1.0);
  CHECK(a["layer"] == "layer_a");
  CHECK(a.contains("created"));

  const json layers = json::parse(slurp(out1 / "layers.json"));
  CHECK(layers["selected"] == "layer_a");
  CHECK(r1.out.find("selected layer: layer_a") != std::string::npos);

  const std::string csv = slurp(out1 / "probe.csv");
  CHECK(csv.rfind("layer,sparsity,val_acc,test_acc,n_train,n_test,seed\n", 0) == 0);
  CHECK(line_count(csv) == 3);
  CHECK(snapshot(out1) == snapshot(out2));
}

TEST_CASE("sae-train, sae-eval and disentangle") {
  const Fixture& fx = fixture();
  const fs::path train_dir = fx.root / "sae";
  const Run t = cli({"sae-train", "--manifest", fx.manifest_a.string(), "--out", train_dir.string(), "--latent", "48",
                     "--sparsity", "0.75", "--epochs", "10", "--seed", "2"});
  REQUIRE_MESSAGE(t.code == 0, t.err);
  CHECK(fs::exists(train_dir / "sae.ckpt"));
  CHECK(json::parse(slurp(train_dir / "sae.json"))["k"] == 12);
  CHECK(json::parse(slurp(train_dir / "config.json"))["sae"]["n_latent"] == 48);

  const fs::path eval_dir = fx.root / "sae_eval";
  const Run e = cli({"sae-eval", "--checkpoint", (train_dir / "sae.ckpt").string(), "--manifest",
                     fx.manifest_a.string(), "--out", eval_dir.string(), "--codes"});
  REQUIRE_MESSAGE(e.code == 0, e.err);
  const json ev = json::parse(e.out);
  CHECK(ev["test_mse"].get<double>() > 0.0);
  CHECK(fs::exists(eval_dir / "codes.atns"));
  CHECK(line_count(slurp(eval_dir / "codes_ids.txt")) == 300);

  SUBCASE("raw embeddings with a planted factor") {
    const fs::path d1 = fx.root / "dis_raw1", d2 = fx.root / "dis_raw2";
    for (const auto& d : {d1, d2}) {
      const Run r = cli({"disentangle", "--manifest", fx.manifest_a.string(), "--factors", fx.factors.string(),
                         "--out", d.string(), "--seed", "4", "--run-id", "raw"});
      REQUIRE_MESSAGE(r.code == 0, r.err);
    }
    const json rep = json::parse(slurp(d1 / "disentangle.json"));
    bool found = false;
    for (const auto& f : rep["factors"])
      if (f["name"] == "planted") {
        found = true;
        CHECK(f["r2"].get<double>() >= 0.99);
      }
    CHECK(found);
    CHECK(rep["sparsity"].is_null());
    CHECK(rep["n_samples"] == 100);
    CHECK(rep["unmapped_factors"].size() == 5);
    CHECK(without_timestamp(slurp(d1 / "disentangle.json")) == without_timestamp(slurp(d2 / "disentangle.json")));
    CHECK(slurp(d1 / "importance.atns") == slurp(d2 / "importance.atns"));
  }
  SUBCASE("SAE codes via checkpoint and via precomputed codes agree") {
    const fs::path dc = fx.root / "dis_ckpt", dp = fx.root / "dis_codes";
    REQUIRE(cli({"disentangle", "--manifest", fx.manifest_a.string(), "--checkpoint",
                 (train_dir / "sae.ckpt").string(), "--factors", fx.factors.string(), "--out", dc.string(),
                 "--run-id", "x", "--layer", "layer_a"})
                .code == 0);
    REQUIRE(cli({"disentangle", "--codes", (eval_dir / "codes.atns").string(), "--ids",
                 (eval_dir / "codes_ids.txt").string(), "--factors", fx.factors.string(), "--out", dp.string(),
                 "--run-id", "x", "--layer", "layer_a"})
                .code == 0);
    json a = json::parse(slurp(dc / "disentangle.json")), b = json::parse(slurp(dp / "disentangle.json"));
    CHECK(a["sparsity"] == 0.75);
    a.erase("created");
    a.erase("sparsity");
    b.erase("created");
    b.erase("sparsity");
    CHECK(a == b);
  }
  SUBCASE("unknown id is an input error naming the id") {
    std::string csv = slurp(fx.factors);
    const auto pos = csv.find('\n') + 1;
    csv.insert(pos, "ghost_utterance,1,2,3,4,5\n");
    const fs::path bad = fx.root / "bad_factors.csv";
    std::ofstream(bad) << csv;
    const Run r = cli({"disentangle", "--manifest", fx.manifest_a.string(), "--factors", bad.string(), "--out",
                       (fx.root / "dis_bad").string()});
    CHECK(r.code == saekit::kExitInvalidInput);
    CHECK(r.err.find("ghost_utterance") != std::string::npos);
  }
}

TEST_CASE("sweep and report") {
  const Fixture& fx = fixture();
  const fs::path run = fx.root / "runs" / "demo";
  const std::vector<std::string> args{"sweep", "--manifest", fx.manifest_a.string(), "--manifest",
                                      fx.manifest_b.string(), "--out", run.string(), "--sparsities", "0.95,0.99",
                                      "--latent", "2048", "--epochs", "3", "--probe-epochs", "20", "--factors",
                                      fx.factors.string(), "--seed", "9"};
  const Run first = cli(args);
  REQUIRE_MESSAGE(first.code == 0, first.err);

  const std::string sweep_csv = slurp(run / "sweep.csv");
  CHECK(sweep_csv.rfind("layer,sparsity,k,best_val_mse,test_mse,probe_test_acc\n", 0) == 0);
  CHECK(line_count(sweep_csv) == 5);
  CHECK(sweep_csv.find("\nlayer_a,0.95,102,") != std::string::npos);
  CHECK(sweep_csv.find("\nlayer_a,0.99,20,") != std::string::npos);
  CHECK(line_count(slurp(run / "probe.csv")) == 7);
  for (const char* f : {"config.json", "sae.ckpt", "probe.json", "disentangle.json", "result.json", "sae.json"})
    CHECK(fs::exists(run / "layer_a" / "0.95" / f));
  CHECK(fs::exists(run / "layer_b" / "raw" / "probe.json"));
  CHECK_FALSE(fs::exists(run / "layer_b" / "raw" / "sae.ckpt"));
  const json cell = json::parse(slurp(run / "layer_a" / "0.99" / "config.json"));
  CHECK(cell["seed"] == (9 ^ 2));

  SUBCASE("resume skips completed cells") {
    const auto before = fs::last_write_time(run / "layer_a" / "0.95" / "sae.ckpt");
    const auto snap = snapshot(run);
    fs::remove_all(run / "layer_b" / "0.99");
    const Run again = cli(args);
    REQUIRE(again.code == 0);
    CHECK(fs::last_write_time(run / "layer_a" / "0.95" / "sae.ckpt") == before);
    CHECK(again.err.find("skip layer_a/0.95") != std::string::npos);
    CHECK(again.err.find("run layer_b/0.99") != std::string::npos);
    CHECK(snapshot(run) == snap);
  }
  SUBCASE("fresh rerun and parallel run are identical") {
    const fs::path other = fx.root / "runs" / "demo2";
    auto args2 = args;
    args2[6] = other.string();
    args2.insert(args2.end(), {"--jobs", "3"});
    REQUIRE(cli(args2).code == 0);
    auto a = snapshot(run), b = snapshot(other);
    // run ids embed the run directory name
    for (auto* m : {&a, &b})
      for (auto& [k, v] : *m)
        if (k.ends_with("disentangle.json")) {
          json doc = json::parse(v);
          doc.erase("run_id");
          v = doc.dump();
        }
    CHECK(a == b);
  }
  SUBCASE("changed settings on an existing tree are rejected") {
    auto changed = args;
    changed[std::find(changed.begin(), changed.end(), "9") - changed.begin()] = "10";
    const Run r = cli(changed);
    CHECK(r.code == saekit::kExitInvalidInput);
    CHECK(r.err.find("different settings") != std::string::npos);
  }
  SUBCASE("report") {
    const Run rep = cli({"report", run.string()});
    REQUIRE_MESSAGE(rep.code == 0, rep.err);
    const fs::path dir = run / "report";
    const std::string summary = slurp(dir / "summary.csv");
    CHECK(line_count(summary) == 1 + 4);  // header + layers x sparsities
    CHECK(line_count(slurp(dir / "baselines.csv")) == 1 + 2);
    for (const char* f : {"accuracy_vs_layer.svg", "accuracy_vs_sparsity.svg", "mse_vs_sparsity.svg",
                          "completeness_vs_entropy.svg", "family_counts.svg", "top10_r2_vs_sparsity.svg",
                          "top10_completeness_vs_sparsity.svg"}) {
      CAPTURE(f);
      const auto doc = xml::check(slurp(dir / f));
      CHECK_MESSAGE(doc.ok, doc.error);
      CHECK(doc.root == "svg");
    }
    const auto acc = xml::check(slurp(dir / "accuracy_vs_sparsity.svg"));
    CHECK(xml::count(acc, "polyline") == 2);
    const std::string acc_text = slurp(dir / "accuracy_vs_sparsity.svg");
    CHECK(acc_text.find("stroke-dasharray") != std::string::npos);
    CHECK(acc_text.find("layer_a (raw)") != std::string::npos);
    CHECK(xml::count(xml::check(slurp(dir / "accuracy_vs_layer.svg")), "polyline") == 3);

    const std::string before = slurp(dir / "summary.csv");
    REQUIRE(cli({"report", "--runs", run.string()}).code == 0);
    CHECK(slurp(dir / "summary.csv") == before);
  }
}

TEST_CASE("sweep and report input errors") {
  const Fixture& fx = fixture();
  CHECK(cli({"sweep", "--manifest", fx.manifest_a.string(), "--out", (fx.root / "empty_grid").string(),
             "--sparsities", ""})
            .code == saekit::kExitInvalidInput);
  CHECK(cli({"sweep", "--manifest", fx.manifest_a.string(), "--out", (fx.root / "bad_grid").string(),
             "--sparsities", "0.9,0.8"})
            .code == saekit::kExitInvalidInput);
  CHECK(cli({"sweep", "--manifest", fx.manifest_a.string(), "--out", (fx.root / "too_sparse").string(),
             "--sparsities", "0.999", "--latent", "64"})
            .code == saekit::kExitInvalidInput);
  fs::create_directories(fx.root / "empty_tree");
  CHECK(cli({"report", (fx.root / "empty_tree").string()}).code == saekit::kExitInvalidInput);
  CHECK(cli({"report", (fx.root / "no_such_tree").string()}).code == saekit::kExitInvalidInput);
}

TEST_CASE("svg helpers") {
  CHECK(saekit::svg::escape("a<b & \"c\"") == "a&lt;b &amp; &quot;c&quot;");
  CHECK(saekit::svg::wants_log_scale({0.5, 60.0}));
  CHECK_FALSE(saekit::svg::wants_log_scale({0.5, 40.0}));
  CHECK_FALSE(saekit::svg::wants_log_scale({}));

  saekit::svg::LinePlot plot;
  plot.title = "t <1>";
  plot.series = {{"s&1", {{0.1, 1.0}, {0.2, 1000.0}}, false}};
  plot.log_y = true;
  const auto doc = xml::check(saekit::svg::render(plot));
  CHECK_MESSAGE(doc.ok, doc.error);
  CHECK(xml::count(doc, "polyline") == 1);

  saekit::svg::BarChart bars;
  bars.categories = {"a", "b"};
  bars.groups = {{"g", {1.0}}};
  CHECK_THROWS(saekit::svg::render(bars));

  CHECK_FALSE(xml::check("<a><b></a></b>").ok);
  CHECK_FALSE(xml::check("<a x=1/>").ok);
  CHECK_FALSE(xml::check("<a>&bogus;</a>").ok);
  CHECK(xml::check("<a x=\"1\"><b/>t&amp;</a>").ok);
}
