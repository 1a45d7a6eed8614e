#include "saekit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "saekit/atns.hpp"
#include "saekit/error.hpp"
#include "saekit/rng.hpp"

namespace saekit {

using nlohmann::json;

std::filesystem::path DatasetManifest::resolve(const ManifestEntry& e) const {
  std::filesystem::path p(e.path);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

void validate_manifest(const DatasetManifest& m) {
  if (m.dim == 0) throw Error(ErrorCode::InvalidInput, "manifest dim must be positive");
  if (m.num_classes == 0) throw Error(ErrorCode::InvalidInput, "manifest num_classes must be positive");
  std::set<std::string> seen;
  for (const auto& e : m.entries) {
    if (!seen.insert(e.id).second) throw Error(ErrorCode::InvalidInput, "duplicate utterance id '" + e.id + "'");
    if (e.label < 0 || static_cast<std::size_t>(e.label) >= m.num_classes)
      throw Error(ErrorCode::InvalidInput, "label " + std::to_string(e.label) + " of '" + e.id +
                                               "' outside [0, " + std::to_string(m.num_classes) + ")");
  }
}

DatasetManifest parse_manifest(const std::string& json_text, std::filesystem::path base_dir) {
  DatasetManifest m;
  m.base_dir = std::move(base_dir);
  try {
    const json doc = json::parse(json_text);
    m.dim = doc.at("dim").get<std::size_t>();
    m.num_classes = doc.at("num_classes").get<std::size_t>();
    for (const auto& item : doc.at("entries")) {
      ManifestEntry e;
      e.id = item.at("id").get<std::string>();
      e.path = item.at("path").get<std::string>();
      e.label = item.at("label").get<int>();
      const auto split = item.at("split").get<std::string>();
      if (split == "train")
        e.split = Split::Train;
      else if (split == "test")
        e.split = Split::Test;
      else
        throw Error(ErrorCode::InvalidInput, "split of '" + e.id + "' must be train or test, got '" + split + "'");
      m.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("malformed manifest: ") + e.what());
  }
  validate_manifest(m);
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path.parent_path());
}

std::string manifest_to_json(const DatasetManifest& m) {
  json entries = json::array();
  for (const auto& e : m.entries)
    entries.push_back({{"id", e.id},
                       {"path", e.path},
                       {"label", e.label},
                       {"split", e.split == Split::Train ? "train" : "test"}});
  const json doc = {{"dim", m.dim}, {"num_classes", m.num_classes}, {"entries", entries}};
  return doc.dump(2) + "\n";
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << manifest_to_json(m);
}

Tensor mean_pool(const Tensor& x) {
  if (x.rank() == 1) return x;
  require_matrix(x, "mean_pool input");
  const std::size_t frames = x.rows();
  const std::size_t dim = x.cols();
  if (frames == 0) throw Error(ErrorCode::EmptyInput, "mean_pool over zero frames");
  std::vector<double> acc(dim, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    auto row = x.row(t);
    for (std::size_t d = 0; d < dim; ++d) acc[d] += row[d];
  }
  Tensor out = Tensor::vector(dim);
  for (std::size_t d = 0; d < dim; ++d) out[d] = static_cast<float>(acc[d] / static_cast<double>(frames));
  return out;
}

Embeddings load_embeddings(const DatasetManifest& m) {
  validate_manifest(m);
  Embeddings out;
  out.num_classes = m.num_classes;
  std::vector<float> train_rows, test_rows;
  for (const auto& e : m.entries) {
    const auto path = m.resolve(e);
    if (!std::filesystem::exists(path))
      throw Error(ErrorCode::InvalidInput, "embedding file for '" + e.id + "' not found: " + path.string());
    const Tensor pooled = mean_pool(load_tensor(path));
    if (pooled.size() != m.dim)
      throw Error(ErrorCode::ShapeError, "'" + e.id + "' has width " + std::to_string(pooled.size()) +
                                             ", manifest dim is " + std::to_string(m.dim));
    auto& target = e.split == Split::Train ? out.train : out.test;
    auto& rows = e.split == Split::Train ? train_rows : test_rows;
    target.ids.push_back(e.id);
    target.labels.push_back(e.label);
    rows.insert(rows.end(), pooled.data().begin(), pooled.data().end());
  }
  out.train.x = Tensor({out.train.size(), m.dim}, std::move(train_rows));
  out.test.x = Tensor({out.test.size(), m.dim}, std::move(test_rows));
  return out;
}

LabeledMatrix subset(const LabeledMatrix& data, std::span<const std::size_t> rows) {
  LabeledMatrix out;
  out.x = gather_rows(data.x, rows);
  for (std::size_t r : rows) {
    out.ids.push_back(data.ids[r]);
    out.labels.push_back(data.labels[r]);
  }
  return out;
}

IndexSplit split_indices(std::size_t n, double val_frac, std::uint64_t seed) {
  if (!(val_frac > 0.0 && val_frac < 1.0))
    throw Error(ErrorCode::DomainError, "validation fraction must lie in (0, 1)");
  if (n == 0) throw Error(ErrorCode::EmptyInput, "nothing to split");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_val = static_cast<std::size_t>(std::llround(val_frac * static_cast<double>(n)));
  IndexSplit out;
  out.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  out.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.train.begin(), out.train.end());
  return out;
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_train_val(
    const DatasetManifest& m, double val_frac, std::uint64_t seed) {
  std::vector<const ManifestEntry*> pool;
  for (const auto& e : m.entries)
    if (e.split == Split::Train) pool.push_back(&e);
  if (pool.empty()) throw Error(ErrorCode::EmptyInput, "manifest has no train entries");
  const IndexSplit s = split_indices(pool.size(), val_frac, seed);
  std::pair<std::vector<std::string>, std::vector<std::string>> out;
  for (std::size_t i : s.train) out.first.push_back(pool[i]->id);
  for (std::size_t i : s.val) out.second.push_back(pool[i]->id);
  return out;
}

std::size_t ColumnStats::num_degenerate() const {
  return static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), true));
}

ColumnStats column_stats(const Tensor& x) {
  require_matrix(x, "standardize input");
  const std::size_t m = x.rows(), p = x.cols();
  if (m < 2) throw Error(ErrorCode::InsufficientSamples, "column statistics need at least 2 rows");
  ColumnStats s{std::vector<double>(p, 0.0), std::vector<double>(p, 0.0), std::vector<bool>(p, false)};
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < p; ++c) s.mean[c] += x(r, c);
  for (auto& v : s.mean) v /= static_cast<double>(m);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < p; ++c) {
      const double d = x(r, c) - s.mean[c];
      s.std[c] += d * d;
    }
  for (std::size_t c = 0; c < p; ++c) {
    s.std[c] = std::sqrt(s.std[c] / static_cast<double>(m));
    if (s.std[c] <= 1e-12 * std::max(1.0, std::abs(s.mean[c]))) {
      s.std[c] = 1.0;
      s.degenerate[c] = true;
    }
  }
  return s;
}

Standardized standardize_columns(const Tensor& x, const std::optional<ColumnStats>& stats) {
  require_matrix(x, "standardize input");
  Standardized out{x, stats ? *stats : column_stats(x)};
  if (out.stats.mean.size() != x.cols())
    throw Error(ErrorCode::ShapeError, "column stats width does not match matrix");
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c)
      out.x(r, c) = static_cast<float>((x(r, c) - out.stats.mean[c]) / out.stats.std[c]);
  return out;
}

Tensor unstandardize_columns(const Tensor& z, const ColumnStats& stats) {
  require_matrix(z, "unstandardize input");
  if (stats.mean.size() != z.cols()) throw Error(ErrorCode::ShapeError, "column stats width does not match matrix");
  Tensor out = z;
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (std::size_t c = 0; c < z.cols(); ++c)
      out(r, c) = static_cast<float>(double(z(r, c)) * stats.std[c] + stats.mean[c]);
  return out;
}

}  // namespace saekit
