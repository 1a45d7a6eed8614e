#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "saekit/tensor.hpp"

namespace saekit {

enum class Split { Train, Test };

struct ManifestEntry {
  std::string id;
  std::string path;  // relative paths resolve against DatasetManifest::base_dir
  int label = 0;
  Split split = Split::Train;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const ManifestEntry& e) const;
};

// Checks id uniqueness and label range; file checks happen in load_embeddings.
void validate_manifest(const DatasetManifest& m);

DatasetManifest parse_manifest(const std::string& json_text, std::filesystem::path base_dir = {});
DatasetManifest load_manifest(const std::filesystem::path& path);
std::string manifest_to_json(const DatasetManifest& m);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& m);

// [T, D] -> [D]; a rank-1 input is returned unchanged.
Tensor mean_pool(const Tensor& x);

struct LabeledMatrix {
  std::vector<std::string> ids;
  Tensor x;  // [M, D]
  std::vector<int> labels;

  std::size_t size() const noexcept { return ids.size(); }
};

struct Embeddings {
  LabeledMatrix train;
  LabeledMatrix test;
  std::size_t num_classes = 0;
};

// Loads and pools every referenced tensor; rejects files whose width differs from dim.
Embeddings load_embeddings(const DatasetManifest& m);

LabeledMatrix subset(const LabeledMatrix& data, std::span<const std::size_t> rows);

struct IndexSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

// Shuffles 0..n-1 with Rng(seed) and takes the first round(val_frac * n) as
// validation. Both halves are returned in ascending order.
IndexSplit split_indices(std::size_t n, double val_frac, std::uint64_t seed);

// Partitions the train-split entries of the manifest; ids come back in manifest order.
std::pair<std::vector<std::string>, std::vector<std::string>> split_train_val(
    const DatasetManifest& m, double val_frac, std::uint64_t seed);

struct ColumnStats {
  std::vector<double> mean;
  std::vector<double> std;  // population std; 1 for degenerate columns
  std::vector<bool> degenerate;

  std::size_t num_degenerate() const;
};

struct Standardized {
  Tensor x;
  ColumnStats stats;
};

ColumnStats column_stats(const Tensor& x);
Standardized standardize_columns(const Tensor& x, const std::optional<ColumnStats>& stats = std::nullopt);
Tensor unstandardize_columns(const Tensor& z, const ColumnStats& stats);

}  // namespace saekit
