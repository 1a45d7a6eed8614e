#include "saekit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "saekit/error.hpp"
#include "saekit/rng.hpp"
#include "saekit/special.hpp"

namespace saekit {

double r2_score(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) throw Error(ErrorCode::ShapeError, "r2_score operands differ in length");
  if (y_true.size() < 2) throw Error(ErrorCode::InsufficientSamples, "r2_score needs at least 2 samples");
  const double mean = std::accumulate(y_true.begin(), y_true.end(), 0.0) / static_cast<double>(y_true.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
  }
  if (!(ss_tot > 0.0)) throw Error(ErrorCode::DegenerateTarget, "r2_score target has zero variance");
  return 1.0 - ss_res / ss_tot;
}

double completeness(std::span<const double> importance) {
  if (importance.size() < 2) throw Error(ErrorCode::DomainError, "completeness needs at least 2 dimensions");
  double total = 0.0;
  for (double r : importance) {
    if (r < 0.0 || !std::isfinite(r)) throw Error(ErrorCode::DomainError, "importance entries must be finite and >= 0");
    total += r;
  }
  if (total == 0.0) return 0.0;
  double entropy = 0.0;
  for (double r : importance) {
    if (r == 0.0) continue;
    const double rho = r / total;
    entropy -= rho * std::log(rho);
  }
  return std::clamp(1.0 - entropy / std::log(static_cast<double>(importance.size())), 0.0, 1.0);
}

namespace {

// Sum of ln(distance to k-th neighbour) over a sorted sample; -inf if any distance is 0.
double sum_log_knn(const std::vector<double>& xs, std::size_t k, bool& saw_zero) {
  const std::size_t n = xs.size();
  double total = 0.0;
  saw_zero = false;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t left = i, right = i;  // next candidates are left-1 and right+1
    double eps = 0.0;
    for (std::size_t step = 0; step < k; ++step) {
      const double dl = left > 0 ? xs[i] - xs[left - 1] : INFINITY;
      const double dr = right + 1 < n ? xs[right + 1] - xs[i] : INFINITY;
      if (dl <= dr) {
        eps = dl;
        --left;
      } else {
        eps = dr;
        ++right;
      }
    }
    if (eps <= 0.0) {
      saw_zero = true;
      return 0.0;
    }
    total += std::log(eps);
  }
  return total;
}

}  // namespace

double knn_entropy(std::span<const double> samples, std::size_t k, std::uint64_t jitter_seed) {
  if (k < 1) throw Error(ErrorCode::DomainError, "knn_entropy needs k >= 1");
  if (samples.size() <= k)
    throw Error(ErrorCode::InsufficientSamples, "knn_entropy needs more than k = " + std::to_string(k) + " samples");
  for (double v : samples)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "knn_entropy sample is not finite");

  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  bool saw_zero = false;
  double log_sum = sum_log_knn(xs, k, saw_zero);
  if (saw_zero) {
    const double n = static_cast<double>(samples.size());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    double scale = std::sqrt(var / n);
    if (!(scale > 0.0)) scale = std::max(std::abs(mean), 1.0);
    xs.assign(samples.begin(), samples.end());
    Rng rng(jitter_seed);
    for (double& v : xs) v += 1e-10 * scale * rng.uniform(-1.0, 1.0);
    std::sort(xs.begin(), xs.end());
    log_sum = sum_log_knn(xs, k, saw_zero);
    if (saw_zero) throw Error(ErrorCode::DomainError, "duplicate samples survive jitter");
  }
  const double m = static_cast<double>(xs.size());
  return digamma(m) - digamma(static_cast<double>(k)) + std::log(2.0) + log_sum / m;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeError, "spearman operands differ in length");
  if (a.size() < 2) throw Error(ErrorCode::InsufficientSamples, "spearman needs at least 2 pairs");
  const auto ra = average_ranks(a), rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace saekit
