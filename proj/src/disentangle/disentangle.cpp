#include "saekit/disentangle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "saekit/dataset.hpp"
#include "saekit/error.hpp"
#include "saekit/metrics.hpp"

namespace saekit {

LambdaPolicy LambdaPolicy::parse(const std::string& text) {
  LambdaPolicy p;
  std::string number = text;
  const std::string suffix = "*lmax";
  p.relative = text.size() > suffix.size() && text.ends_with(suffix);
  if (p.relative) number = text.substr(0, text.size() - suffix.size());
  const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), p.value);
  if (number.empty() || ec != std::errc() || ptr != number.data() + number.size() || !(p.value >= 0.0) ||
      !std::isfinite(p.value))
    throw Error(ErrorCode::InvalidInput, "lambda policy must look like '0.01*lmax' or '0.05', got '" + text + "'");
  return p;
}

std::string LambdaPolicy::to_string() const {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr) + (relative ? "*lmax" : "");
}

TopList top_factors(const std::vector<FactorResult>& results, double FactorResult::*metric, std::size_t n) {
  std::vector<std::size_t> idx(results.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return results[a].*metric > results[b].*metric; });
  TopList out;
  for (std::size_t i = 0; i < std::min(n, idx.size()); ++i)
    out.items.push_back({results[idx[i]].name, results[idx[i]].*metric});
  if (out.items.empty()) return out;
  for (const auto& it : out.items) out.mean += it.value;
  out.mean /= static_cast<double>(out.items.size());
  for (const auto& it : out.items) out.std += (it.value - out.mean) * (it.value - out.mean);
  out.std = std::sqrt(out.std / static_cast<double>(out.items.size()));
  return out;
}

namespace {

std::vector<std::size_t> align_rows(std::span<const std::string> code_ids, const FactorTable& factors) {
  std::unordered_map<std::string, std::size_t> where;
  for (std::size_t i = 0; i < code_ids.size(); ++i)
    if (!where.emplace(code_ids[i], i).second)
      throw Error(ErrorCode::AlignmentError, "duplicate code id '" + code_ids[i] + "'");
  std::vector<std::size_t> rows;
  std::string missing;
  std::size_t n_missing = 0;
  for (const auto& id : factors.ids) {
    const auto it = where.find(id);
    if (it == where.end()) {
      missing += (n_missing++ ? ", " : "") + id;
    } else {
      rows.push_back(it->second);
    }
  }
  if (n_missing > 0)
    throw Error(ErrorCode::AlignmentError,
                std::to_string(n_missing) + " factor id(s) have no representation row: " + missing);
  return rows;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pop_std(std::span<const double> v, double mean) {
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

DisentangleResult run_disentanglement(const Tensor& codes, std::span<const std::string> code_ids,
                                      const FactorTable& factors, const FamilyMap& families,
                                      const DisentangleConfig& cfg) {
  require_matrix(codes, "representation matrix");
  if (code_ids.size() != codes.rows())
    throw Error(ErrorCode::ShapeError, "code id count does not match representation rows");
  if (factors.num_factors() == 0) throw Error(ErrorCode::InvalidInput, "factor table has no factor columns");
  if (codes.cols() < 2) throw Error(ErrorCode::InvalidInput, "representation needs at least 2 dimensions");

  const Tensor z = gather_rows(codes, align_rows(code_ids, factors));
  const std::size_t m = z.rows();
  const std::size_t p = z.cols();

  IndexSplit split;
  if (cfg.in_sample) {
    split.train.resize(m);
    std::iota(split.train.begin(), split.train.end(), std::size_t{0});
    split.val = split.train;
  } else {
    split = split_indices(m, cfg.eval_frac, cfg.seed);
  }
  if (split.train.size() < 2 || split.val.size() < 2)
    throw Error(ErrorCode::InsufficientSamples, "fit/eval split leaves fewer than 2 rows in a part");

  const ColumnStats stats = column_stats(gather_rows(z, split.train));
  const Tensor z_std = standardize_columns(z, stats).x;
  const Design fit_design = Design::from_rows(z_std, split.train);
  const Design eval_design = Design::from_rows(z_std, split.val);

  const FamilyAssignment fam = assign_families(factors.names, families);
  DisentangleResult out;
  out.importance = Tensor::matrix(p, factors.num_factors());
  auto& rep = out.report;
  rep.lam_policy = cfg.lam.to_string();
  rep.n_samples = m;
  rep.n_dims = p;
  rep.unmapped_factors = fam.unmapped;

  for (std::size_t f = 0; f < factors.num_factors(); ++f) {
    const std::string& name = factors.names[f];
    const std::vector<double> raw = factors.column(f);
    std::vector<double> fit_target, eval_target;
    for (std::size_t r : split.train) fit_target.push_back(raw[r]);
    for (std::size_t r : split.val) eval_target.push_back(raw[r]);

    const double mu = mean_of(fit_target);
    const double sigma = pop_std(fit_target, mu);
    if (!(sigma > 1e-12 * std::max(1.0, std::abs(mu)))) {
      rep.skipped.push_back({name, "zero variance in the fit split"});
      continue;
    }
    for (double& v : fit_target) v = (v - mu) / sigma;

    const double lam = cfg.lam.resolve(lasso_lambda_max(fit_design, fit_target));
    LassoModel model = fit_lasso(fit_design, fit_target, lam, cfg.lasso);
    model.factor_name = name;

    std::vector<double> pred = lasso_predict(model, eval_design);
    for (double& v : pred) v = mu + sigma * v;

    FactorResult res;
    res.name = name;
    res.family = fam.family[f];
    res.lam = lam;
    res.converged = model.converged;
    res.nnz = model.nnz();
    try {
      res.r2 = r2_score(eval_target, pred);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateTarget) throw;
      rep.skipped.push_back({name, "zero variance in the eval split"});
      continue;
    }
    std::vector<double> importance(p);
    for (std::size_t j = 0; j < p; ++j) {
      importance[j] = std::abs(model.beta[j]);
      out.importance(j, f) = static_cast<float>(importance[j]);
    }
    res.zero_importance = res.nnz == 0;
    res.completeness = completeness(importance);
    res.entropy_nats = knn_entropy(raw, cfg.knn_k, cfg.seed);
    rep.factors.push_back(std::move(res));
  }

  rep.top_r2 = top_factors(rep.factors, &FactorResult::r2, cfg.top_n);
  rep.top_completeness = top_factors(rep.factors, &FactorResult::completeness, cfg.top_n);
  for (const auto& item : rep.top_r2.items) {
    const auto it = std::find_if(rep.factors.begin(), rep.factors.end(),
                                 [&](const FactorResult& r) { return r.name == item.name; });
    ++rep.family_counts[it->family];
  }
  return out;
}

namespace {

using nlohmann::json;

json top_to_json(const TopList& top) {
  json items = json::array();
  for (const auto& it : top.items) items.push_back({{"name", it.name}, {"value", it.value}});
  return items;
}

TopList top_from_json(const json& items, const json& summary) {
  TopList t;
  for (const auto& it : items) t.items.push_back({it.at("name").get<std::string>(), it.at("value").get<double>()});
  t.mean = summary.at("mean").get<double>();
  t.std = summary.at("std").get<double>();
  return t;
}

}  // namespace

std::string report_to_json(const DisentangleReport& r, const std::string& created) {
  json factors = json::array();
  for (const auto& f : r.factors)
    factors.push_back({{"name", f.name},
                       {"family", f.family},
                       {"r2", f.r2},
                       {"completeness", f.completeness},
                       {"entropy_nats", f.entropy_nats},
                       {"nnz", f.nnz},
                       {"lam", f.lam},
                       {"converged", f.converged},
                       {"zero_importance", f.zero_importance}});
  json skipped = json::array();
  for (const auto& s : r.skipped) skipped.push_back({{"name", s.name}, {"reason", s.reason}});
  json doc = {
      {"run_id", r.run_id},
      {"layer", r.layer},
      {"sparsity", r.sparsity ? json(*r.sparsity) : json(nullptr)},
      {"lam_policy", r.lam_policy},
      {"created", created},
      {"n_samples", r.n_samples},
      {"n_dims", r.n_dims},
      {"factors", factors},
      {"skipped_factors", skipped},
      {"unmapped_factors", r.unmapped_factors},
      {"top10_r2", top_to_json(r.top_r2)},
      {"top10_r2_summary", {{"mean", r.top_r2.mean}, {"std", r.top_r2.std}}},
      {"top10_completeness", top_to_json(r.top_completeness)},
      {"top10_completeness_summary", {{"mean", r.top_completeness.mean}, {"std", r.top_completeness.std}}},
      {"family_counts", r.family_counts},
  };
  return doc.dump(2) + "\n";
}

DisentangleReport report_from_json(const std::string& text) {
  DisentangleReport r;
  try {
    const json doc = json::parse(text);
    r.run_id = doc.at("run_id").get<std::string>();
    r.layer = doc.at("layer").get<std::string>();
    if (!doc.at("sparsity").is_null()) r.sparsity = doc.at("sparsity").get<double>();
    r.lam_policy = doc.at("lam_policy").get<std::string>();
    r.n_samples = doc.at("n_samples").get<std::size_t>();
    r.n_dims = doc.at("n_dims").get<std::size_t>();
    for (const auto& f : doc.at("factors")) {
      FactorResult fr;
      fr.name = f.at("name").get<std::string>();
      fr.family = f.at("family").get<std::string>();
      fr.r2 = f.at("r2").get<double>();
      fr.completeness = f.at("completeness").get<double>();
      fr.entropy_nats = f.at("entropy_nats").get<double>();
      fr.nnz = f.at("nnz").get<std::size_t>();
      fr.lam = f.at("lam").get<double>();
      fr.converged = f.at("converged").get<bool>();
      fr.zero_importance = f.at("zero_importance").get<bool>();
      r.factors.push_back(std::move(fr));
    }
    for (const auto& s : doc.at("skipped_factors"))
      r.skipped.push_back({s.at("name").get<std::string>(), s.at("reason").get<std::string>()});
    r.unmapped_factors = doc.at("unmapped_factors").get<std::vector<std::string>>();
    r.top_r2 = top_from_json(doc.at("top10_r2"), doc.at("top10_r2_summary"));
    r.top_completeness = top_from_json(doc.at("top10_completeness"), doc.at("top10_completeness_summary"));
    r.family_counts = doc.at("family_counts").get<std::map<std::string, std::size_t>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("malformed disentanglement report: ") + e.what());
  }
  return r;
}

}  // namespace saekit
