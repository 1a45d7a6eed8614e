#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "saekit/dataset.hpp"
#include "saekit/factors.hpp"
#include "saekit/probe.hpp"
#include "saekit/sae.hpp"

namespace saekit::app {

namespace fs = std::filesystem;
using nlohmann::json;

// Serialised stderr for progress lines from worker threads.
class Log {
 public:
  explicit Log(std::ostream& err) : err_(err) {}
  void info(const std::string& line);
  void warn(const std::string& line);

 private:
  std::ostream& err_;
  std::mutex mu_;
};

std::string iso_timestamp();

// Writes through a temporary file and a rename so readers never see a partial file.
void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

std::string json_text(const json& doc);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// "0.75,0.9" -> {0.75, 0.9}; strictly increasing, each in (0, 1).
std::vector<double> parse_sparsities(const std::string& text);
std::string sparsity_label(double s);

struct Layer {
  std::string name;
  std::string manifest_path;  // as given on the command line
  Embeddings data;
};

// Names default to the manifest file stem, or the parent directory name
// when the file is called manifest.json.
std::vector<std::string> layer_names(const std::vector<std::string>& manifests, const std::vector<std::string>& names);
std::vector<Layer> load_layers(const std::vector<std::string>& manifests, const std::vector<std::string>& names);

// Train rows followed by test rows.
struct CodePool {
  std::vector<std::string> ids;
  Tensor x;
};
CodePool all_rows(const Embeddings& e);

FamilyMap family_map_or_default(const std::optional<std::string>& path);

json probe_report_json(const ProbeReport& r);
json sae_report_json(const SaeTrainReport& r);

}  // namespace saekit::app
