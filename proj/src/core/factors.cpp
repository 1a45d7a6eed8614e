#include "saekit/factors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "saekit/error.hpp"

namespace saekit {

std::vector<double> FactorTable::column(std::size_t factor) const {
  std::vector<double> out(num_rows());
  for (std::size_t r = 0; r < num_rows(); ++r) out[r] = at(r, factor);
  return out;
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) throw Error(ErrorCode::InvalidInput, "unterminated quote on CSV line " + std::to_string(line_no));
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

double parse_number(std::string_view s, std::size_t line_no, std::string_view column) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw Error(ErrorCode::InvalidInput, "line " + std::to_string(line_no) + ", column '" +
                                             std::string(column) + "': not a finite number '" +
                                             std::string(s) + "'");
  return v;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

FactorTable parse_factor_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  FactorTable table;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::set<std::string> seen_ids;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fields = split_csv_line(line, line_no);
    if (!header_seen) {
      if (fields.empty() || fields[0] != "id")
        throw Error(ErrorCode::InvalidInput, "factor CSV header must start with 'id'");
      std::set<std::string> names;
      for (std::size_t i = 1; i < fields.size(); ++i) {
        if (!names.insert(fields[i]).second)
          throw Error(ErrorCode::InvalidInput, "duplicate factor name '" + fields[i] + "'");
        table.names.push_back(fields[i]);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != table.names.size() + 1)
      throw Error(ErrorCode::InvalidInput, "line " + std::to_string(line_no) + " has " +
                                               std::to_string(fields.size()) + " fields, expected " +
                                               std::to_string(table.names.size() + 1));
    if (!seen_ids.insert(fields[0]).second)
      throw Error(ErrorCode::InvalidInput, "duplicate id '" + fields[0] + "' in factor CSV");
    table.ids.push_back(fields[0]);
    for (std::size_t i = 1; i < fields.size(); ++i)
      table.values.push_back(parse_number(fields[i], line_no, table.names[i - 1]));
  }
  if (!header_seen) throw Error(ErrorCode::InvalidInput, "factor CSV is empty");
  return table;
}

FactorTable load_factor_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open factor table " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_factor_csv(buf.str());
}

std::string factor_table_to_csv(const FactorTable& table) {
  std::string out = "id";
  for (const auto& n : table.names) out += "," + csv_field(n);
  out += "\n";
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    out += csv_field(table.ids[r]);
    for (std::size_t f = 0; f < table.num_factors(); ++f) out += "," + format_number(table.at(r, f));
    out += "\n";
  }
  return out;
}

void save_factor_csv(const std::filesystem::path& path, const FactorTable& table) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << factor_table_to_csv(table);
}

namespace {

constexpr std::array<std::string_view, 7> kFamilies = {"pitch",  "loudness", "formants", "mfcc",
                                                       "rhythm", "spectral", "quality"};

constexpr std::array<std::string_view, 88> kEgemaps = {
    "F0semitoneFrom27.5Hz_sma3nz_amean",
    "F0semitoneFrom27.5Hz_sma3nz_stddevNorm",
    "F0semitoneFrom27.5Hz_sma3nz_percentile20.0",
    "F0semitoneFrom27.5Hz_sma3nz_percentile50.0",
    "F0semitoneFrom27.5Hz_sma3nz_percentile80.0",
    "F0semitoneFrom27.5Hz_sma3nz_pctlrange0-2",
    "F0semitoneFrom27.5Hz_sma3nz_meanRisingSlope",
    "F0semitoneFrom27.5Hz_sma3nz_stddevRisingSlope",
    "F0semitoneFrom27.5Hz_sma3nz_meanFallingSlope",
    "F0semitoneFrom27.5Hz_sma3nz_stddevFallingSlope",
    "loudness_sma3_amean",
    "loudness_sma3_stddevNorm",
    "loudness_sma3_percentile20.0",
    "loudness_sma3_percentile50.0",
    "loudness_sma3_percentile80.0",
    "loudness_sma3_pctlrange0-2",
    "loudness_sma3_meanRisingSlope",
    "loudness_sma3_stddevRisingSlope",
    "loudness_sma3_meanFallingSlope",
    "loudness_sma3_stddevFallingSlope",
    "spectralFlux_sma3_amean",
    "spectralFlux_sma3_stddevNorm",
    "mfcc1_sma3_amean",
    "mfcc1_sma3_stddevNorm",
    "mfcc2_sma3_amean",
    "mfcc2_sma3_stddevNorm",
    "mfcc3_sma3_amean",
    "mfcc3_sma3_stddevNorm",
    "mfcc4_sma3_amean",
    "mfcc4_sma3_stddevNorm",
    "jitterLocal_sma3nz_amean",
    "jitterLocal_sma3nz_stddevNorm",
    "shimmerLocaldB_sma3nz_amean",
    "shimmerLocaldB_sma3nz_stddevNorm",
    "HNRdBACF_sma3nz_amean",
    "HNRdBACF_sma3nz_stddevNorm",
    "logRelF0-H1-H2_sma3nz_amean",
    "logRelF0-H1-H2_sma3nz_stddevNorm",
    "logRelF0-H1-A3_sma3nz_amean",
    "logRelF0-H1-A3_sma3nz_stddevNorm",
    "F1frequency_sma3nz_amean",
    "F1frequency_sma3nz_stddevNorm",
    "F1bandwidth_sma3nz_amean",
    "F1bandwidth_sma3nz_stddevNorm",
    "F1amplitudeLogRelF0_sma3nz_amean",
    "F1amplitudeLogRelF0_sma3nz_stddevNorm",
    "F2frequency_sma3nz_amean",
    "F2frequency_sma3nz_stddevNorm",
    "F2bandwidth_sma3nz_amean",
    "F2bandwidth_sma3nz_stddevNorm",
    "F2amplitudeLogRelF0_sma3nz_amean",
    "F2amplitudeLogRelF0_sma3nz_stddevNorm",
    "F3frequency_sma3nz_amean",
    "F3frequency_sma3nz_stddevNorm",
    "F3bandwidth_sma3nz_amean",
    "F3bandwidth_sma3nz_stddevNorm",
    "F3amplitudeLogRelF0_sma3nz_amean",
    "F3amplitudeLogRelF0_sma3nz_stddevNorm",
    "alphaRatioV_sma3nz_amean",
    "alphaRatioV_sma3nz_stddevNorm",
    "hammarbergIndexV_sma3nz_amean",
    "hammarbergIndexV_sma3nz_stddevNorm",
    "slopeV0-500_sma3nz_amean",
    "slopeV0-500_sma3nz_stddevNorm",
    "slopeV500-1500_sma3nz_amean",
    "slopeV500-1500_sma3nz_stddevNorm",
    "spectralFluxV_sma3nz_amean",
    "spectralFluxV_sma3nz_stddevNorm",
    "mfcc1V_sma3nz_amean",
    "mfcc1V_sma3nz_stddevNorm",
    "mfcc2V_sma3nz_amean",
    "mfcc2V_sma3nz_stddevNorm",
    "mfcc3V_sma3nz_amean",
    "mfcc3V_sma3nz_stddevNorm",
    "mfcc4V_sma3nz_amean",
    "mfcc4V_sma3nz_stddevNorm",
    "alphaRatioUV_sma3nz_amean",
    "hammarbergIndexUV_sma3nz_amean",
    "slopeUV0-500_sma3nz_amean",
    "slopeUV500-1500_sma3nz_amean",
    "spectralFluxUV_sma3nz_amean",
    "loudnessPeaksPerSec",
    "VoicedSegmentsPerSec",
    "MeanVoicedSegmentLengthSec",
    "StddevVoicedSegmentLengthSec",
    "MeanUnvoicedSegmentLength",
    "StddevUnvoicedSegmentLength",
    "equivalentSoundLevel_dBp",
};

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }
bool contains(std::string_view s, std::string_view p) { return s.find(p) != std::string_view::npos; }

}  // namespace

std::span<const std::string_view> factor_families() noexcept { return kFamilies; }

bool is_factor_family(std::string_view family) noexcept {
  for (auto f : kFamilies)
    if (f == family) return true;
  return false;
}

std::span<const std::string_view> egemaps_factor_names() noexcept { return kEgemaps; }

std::string_view classify_egemaps_factor(std::string_view name) noexcept {
  // Rate and segment-length descriptors first: "loudnessPeaksPerSec" is rhythm, not loudness.
  if (contains(name, "PerSec") || contains(name, "SegmentLength")) return "rhythm";
  if (starts_with(name, "F0semitone")) return "pitch";
  if (starts_with(name, "loudness") || starts_with(name, "equivalentSoundLevel")) return "loudness";
  if (starts_with(name, "F1") || starts_with(name, "F2") || starts_with(name, "F3")) return "formants";
  if (starts_with(name, "mfcc")) return "mfcc";
  if (starts_with(name, "alphaRatio") || starts_with(name, "hammarbergIndex") || starts_with(name, "slope") ||
      starts_with(name, "spectralFlux"))
    return "spectral";
  if (starts_with(name, "jitter") || starts_with(name, "shimmer") || starts_with(name, "HNR") ||
      starts_with(name, "logRelF0-H1"))
    return "quality";
  return kOtherFamily;
}

FamilyMap default_family_map() {
  FamilyMap map;
  for (auto name : kEgemaps) map.emplace(std::string(name), std::string(classify_egemaps_factor(name)));
  return map;
}

FamilyMap parse_family_map(const std::string& json_text) {
  FamilyMap map;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    if (!doc.is_object()) throw Error(ErrorCode::InvalidInput, "family map must be a JSON object");
    for (const auto& [factor, family] : doc.items()) {
      const auto fam = family.get<std::string>();
      if (!is_factor_family(fam))
        throw Error(ErrorCode::InvalidInput, "factor '" + factor + "' mapped to unknown family '" + fam + "'");
      map.emplace(factor, fam);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("malformed family map: ") + e.what());
  }
  return map;
}

FamilyMap load_family_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open family map " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_family_map(buf.str());
}

std::string family_map_to_json(const FamilyMap& map) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [k, v] : map) doc[k] = v;
  return doc.dump(2) + "\n";
}

FamilyAssignment assign_families(std::span<const std::string> factor_names, const FamilyMap& map) {
  FamilyAssignment out;
  for (const auto& name : factor_names) {
    const auto it = map.find(name);
    if (it != map.end()) {
      out.family.push_back(it->second);
    } else {
      out.family.emplace_back(kOtherFamily);
      out.unmapped.push_back(name);
    }
  }
  return out;
}

}  // namespace saekit
