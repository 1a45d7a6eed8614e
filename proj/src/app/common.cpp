#include "common.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "saekit/error.hpp"

namespace saekit::app {

void Log::info(const std::string& line) {
  std::lock_guard lock(mu_);
  err_ << line << '\n';
}

void Log::warn(const std::string& line) {
  std::lock_guard lock(mu_);
  err_ << "warning: " << line << '\n';
}

std::string iso_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string json_text(const json& doc) { return doc.dump(2) + "\n"; }

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<double> parse_sparsities(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    const std::string token = item.substr(b, e - b + 1);
    double v = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
      throw Error(ErrorCode::InvalidInput, "sparsity '" + token + "' is not a number");
    if (!(v > 0.0 && v < 1.0)) throw Error(ErrorCode::InvalidInput, "sparsity " + token + " must lie in (0, 1)");
    if (!out.empty() && !(v > out.back()))
      throw Error(ErrorCode::InvalidInput, "sparsities must be strictly increasing");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidInput, "the sparsity grid is empty");
  return out;
}

std::string sparsity_label(double s) { return format_double(s); }

std::vector<std::string> layer_names(const std::vector<std::string>& manifests, const std::vector<std::string>& names) {
  if (manifests.empty()) throw Error(ErrorCode::InvalidInput, "at least one --manifest is required");
  if (!names.empty() && names.size() != manifests.size())
    throw Error(ErrorCode::InvalidInput, "--layer must be given once per --manifest");
  std::vector<std::string> out = names;
  if (out.empty())
    for (const auto& m : manifests) {
      const fs::path p(m);
      std::string name = p.stem().string();
      if (name == "manifest" && p.has_parent_path()) name = fs::absolute(p).parent_path().filename().string();
      out.push_back(name);
    }
  std::set<std::string> seen;
  for (const auto& n : out) {
    if (n.empty() || n == "." || n == ".." || n.find('/') != std::string::npos)
      throw Error(ErrorCode::InvalidInput, "invalid layer name '" + n + "'");
    if (!seen.insert(n).second)
      throw Error(ErrorCode::InvalidInput, "layer name '" + n + "' is used twice; pass --layer explicitly");
  }
  return out;
}

std::vector<Layer> load_layers(const std::vector<std::string>& manifests, const std::vector<std::string>& names) {
  const auto resolved = layer_names(manifests, names);
  std::vector<Layer> layers;
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    if (!fs::exists(manifests[i])) throw Error(ErrorCode::Io, "manifest not found: " + manifests[i]);
    layers.push_back({resolved[i], manifests[i], load_embeddings(load_manifest(manifests[i]))});
  }
  return layers;
}

CodePool all_rows(const Embeddings& e) {
  CodePool pool;
  const std::size_t d = e.train.size() ? e.train.x.cols() : e.test.x.cols();
  pool.x = Tensor::matrix(e.train.size() + e.test.size(), d);
  std::size_t r = 0;
  for (const LabeledMatrix* part : {&e.train, &e.test})
    for (std::size_t i = 0; i < part->size(); ++i, ++r) {
      pool.ids.push_back(part->ids[i]);
      std::copy(part->x.row(i).begin(), part->x.row(i).end(), pool.x.row(r).begin());
    }
  return pool;
}

FamilyMap family_map_or_default(const std::optional<std::string>& path) {
  if (!path) return default_family_map();
  if (!fs::exists(*path)) throw Error(ErrorCode::Io, "family map not found: " + *path);
  return load_family_map(*path);
}

json probe_report_json(const ProbeReport& r) {
  return {{"best_val_accuracy", r.best_val_accuracy},
          {"best_epoch", r.best_epoch},
          {"test_accuracy", r.test_accuracy ? json(*r.test_accuracy) : json(nullptr)},
          {"confusion", r.confusion},
          {"n_train", r.n_train},
          {"n_val", r.n_val},
          {"n_test", r.n_test},
          {"train_loss", r.train_loss},
          {"val_accuracy", r.val_accuracy}};
}

json sae_report_json(const SaeTrainReport& r) {
  return {{"k", r.k},
          {"best_epoch", r.best_epoch},
          {"best_val_mse", r.best_val_mse},
          {"train_mse", r.train_mse},
          {"val_mse", r.val_mse}};
}

}  // namespace saekit::app
