#include "saekit/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "saekit/error.hpp"

namespace saekit {

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_.empty() || shape_.size() > 2)
    throw Error(ErrorCode::ShapeError, "tensor rank must be 1 or 2, got " + std::to_string(shape_.size()));
  const std::size_t n =
      std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
  if (n != data_.size())
    throw Error(ErrorCode::ShapeError, "shape product " + std::to_string(n) + " != data length " +
                                           std::to_string(data_.size()));
}

Tensor Tensor::vector(std::size_t n, float fill) {
  return Tensor({n}, std::vector<float>(n, fill));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, float fill) {
  return Tensor({rows, cols}, std::vector<float>(rows * cols, fill));
}

bool Tensor::all_finite() const noexcept {
  for (float v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor gather_rows(const Tensor& source, std::span<const std::size_t> indices) {
  Tensor out = Tensor::matrix(indices.size(), source.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= source.rows())
      throw Error(ErrorCode::ShapeError, "row index " + std::to_string(indices[i]) + " out of range");
    auto src = source.row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

void require_matrix(const Tensor& t, const char* what) {
  if (t.rank() != 2) throw Error(ErrorCode::ShapeError, std::string(what) + " must be a matrix");
}

}  // namespace saekit
