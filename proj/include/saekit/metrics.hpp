#pragma once

#include <cstdint>
#include <span>

namespace saekit {

// 1 - SS_res / SS_tot; negative for predictors worse than the mean.
double r2_score(std::span<const double> y_true, std::span<const double> y_pred);

// 1 - H(rho) / ln P with rho = R / sum(R). An all-zero column scores 0.
double completeness(std::span<const double> importance);

// Kozachenko-Leonenko estimate in nats for 1-D samples:
//   psi(M) - psi(k) + ln 2 + mean_i ln eps_i
// where eps_i is the distance to the k-th nearest neighbour. When any eps_i
// is zero, every sample gets a seeded jitter of at most 1e-10 * scale.
double knn_entropy(std::span<const double> samples, std::size_t k = 3, std::uint64_t jitter_seed = 0);

// Pearson correlation of average ranks.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace saekit
