#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "saekit/factors.hpp"
#include "saekit/lasso.hpp"
#include "saekit/tensor.hpp"

namespace saekit {

// Lasso strength per factor: either a fraction of that factor's lambda_max
// ("0.01*lmax") or a fixed value ("0.05").
struct LambdaPolicy {
  bool relative = true;
  double value = 0.01;

  static LambdaPolicy parse(const std::string& text);
  std::string to_string() const;
  double resolve(double lambda_max) const { return relative ? value * lambda_max : value; }
};

struct DisentangleConfig {
  LambdaPolicy lam;
  double eval_frac = 0.2;
  bool in_sample = false;  // fit and score R^2 on every row
  std::uint64_t seed = 0;
  std::size_t knn_k = 3;
  std::size_t top_n = 10;
  LassoOptions lasso;
};

struct FactorResult {
  std::string name;
  std::string family;
  double r2 = 0.0;
  double completeness = 0.0;
  double entropy_nats = 0.0;
  std::size_t nnz = 0;
  double lam = 0.0;
  bool converged = true;
  bool zero_importance = false;  // every coefficient shrunk to 0; completeness set to 0
};

struct RankedFactor {
  std::string name;
  double value = 0.0;
};

struct TopList {
  std::vector<RankedFactor> items;  // descending
  double mean = 0.0;
  double std = 0.0;  // population
};

struct SkippedFactor {
  std::string name;
  std::string reason;
};

struct DisentangleReport {
  std::string run_id;
  std::string layer;
  std::optional<double> sparsity;  // empty for the raw representation
  std::string lam_policy;
  std::size_t n_samples = 0;
  std::size_t n_dims = 0;
  std::vector<FactorResult> factors;
  std::vector<SkippedFactor> skipped;
  std::vector<std::string> unmapped_factors;
  TopList top_r2;
  TopList top_completeness;
  std::map<std::string, std::size_t> family_counts;  // families of the top-by-R^2 set
};

struct DisentangleResult {
  DisentangleReport report;
  Tensor importance;  // [n_dims, n_factors] of |beta|; zero columns for skipped factors
};

// Rows of `codes` are matched to factor rows by id; every factor id must be
// present among code_ids (AlignmentError lists the missing ones).
DisentangleResult run_disentanglement(const Tensor& codes, std::span<const std::string> code_ids,
                                      const FactorTable& factors, const FamilyMap& families,
                                      const DisentangleConfig& cfg);

TopList top_factors(const std::vector<FactorResult>& results, double FactorResult::*metric, std::size_t n);

// JSON document; `created` is written verbatim as the timestamp field.
std::string report_to_json(const DisentangleReport& report, const std::string& created);
DisentangleReport report_from_json(const std::string& text);

}  // namespace saekit
