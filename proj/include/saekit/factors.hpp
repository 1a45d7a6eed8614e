#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace saekit {

// Per-utterance acoustic descriptors in raw units.
struct FactorTable {
  std::vector<std::string> ids;
  std::vector<std::string> names;
  std::vector<double> values;  // ids.size() x names.size(), row-major

  std::size_t num_rows() const noexcept { return ids.size(); }
  std::size_t num_factors() const noexcept { return names.size(); }
  double at(std::size_t row, std::size_t factor) const { return values[row * names.size() + factor]; }
  std::vector<double> column(std::size_t factor) const;

  friend bool operator==(const FactorTable&, const FactorTable&) = default;
};

// CSV with header "id,<factor>,...". Fields may be double-quoted. Empty or
// non-numeric cells are rejected since the table admits no missing values.
FactorTable parse_factor_csv(std::string_view text);
FactorTable load_factor_csv(const std::filesystem::path& path);
std::string factor_table_to_csv(const FactorTable& table);
void save_factor_csv(const std::filesystem::path& path, const FactorTable& table);

inline constexpr std::string_view kOtherFamily = "other";

// The seven descriptor families: pitch, loudness, formants, mfcc, rhythm, spectral, quality.
std::span<const std::string_view> factor_families() noexcept;
bool is_factor_family(std::string_view family) noexcept;

using FamilyMap = std::map<std::string, std::string, std::less<>>;

// The 88 eGeMAPS v02 functional names in openSMILE output order.
std::span<const std::string_view> egemaps_factor_names() noexcept;

// Name-pattern classifier behind the default map; returns "other" when no rule applies.
std::string_view classify_egemaps_factor(std::string_view name) noexcept;

FamilyMap default_family_map();

// JSON object {"factor": "family"}; every family must be one of the seven.
FamilyMap parse_family_map(const std::string& json_text);
FamilyMap load_family_map(const std::filesystem::path& path);
std::string family_map_to_json(const FamilyMap& map);

struct FamilyAssignment {
  std::vector<std::string> family;      // one per factor, "other" when unmapped
  std::vector<std::string> unmapped;    // factor names that fell through to "other"
};

FamilyAssignment assign_families(std::span<const std::string> factor_names, const FamilyMap& map);

}  // namespace saekit
