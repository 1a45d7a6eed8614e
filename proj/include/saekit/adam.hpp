#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace saekit {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamState(std::size_t n_params, AdamConfig config);

  std::size_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
  AdamConfig config;
};

// Bias-corrected Adam update. Moments live in float64; parameters stay float32.
void adam_step(std::span<float> params, std::span<const double> grads, AdamState& state);

}  // namespace saekit
