#pragma once

#include <span>

#include "saekit/tensor.hpp"

// Dense row-major products. Accumulation is float64, results are float32.
namespace saekit {

Tensor transpose(const Tensor& a);
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matvec(const Tensor& a, std::span<const float> x);

}  // namespace saekit
