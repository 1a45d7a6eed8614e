#include "saekit/adam.hpp"

#include <cmath>
#include <string>

#include "saekit/error.hpp"
#include "saekit/kernels.hpp"

namespace saekit {

AdamState::AdamState(std::size_t n_params, AdamConfig cfg)
    : m(n_params, 0.0), v(n_params, 0.0), config(cfg) {
  if (!(cfg.lr > 0.0)) throw Error(ErrorCode::DomainError, "learning rate must be positive");
  if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 || cfg.beta2 >= 1.0)
    throw Error(ErrorCode::DomainError, "Adam betas must lie in [0, 1)");
  if (!(cfg.eps > 0.0)) throw Error(ErrorCode::DomainError, "Adam eps must be positive");
}

void adam_step(std::span<float> params, std::span<const double> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw Error(ErrorCode::ShapeError, "adam_step: params " + std::to_string(params.size()) +
                                           ", grads " + std::to_string(grads.size()) + ", state " +
                                           std::to_string(state.m.size()));
  ++state.step;
  const auto t = static_cast<double>(state.step);
  const simd::AdamCoefficients c{
      state.config.lr,
      state.config.beta1,
      state.config.beta2,
      state.config.eps,
      1.0 - std::pow(state.config.beta1, t),
      1.0 - std::pow(state.config.beta2, t),
  };
  simd::kernels().adam_update(c, params.data(), grads.data(), state.m.data(), state.v.data(),
                              params.size());
}

}  // namespace saekit
