#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace saekit {

// Dense row-major float32 container of rank 1 ([n]) or rank 2 ([rows, cols]).
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::vector<std::size_t> shape, std::vector<float> data);

  static Tensor vector(std::size_t n, float fill = 0.0f);
  static Tensor matrix(std::size_t rows, std::size_t cols, float fill = 0.0f);

  std::size_t rank() const noexcept { return shape_.size(); }
  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // A rank-1 tensor is treated as a single row.
  std::size_t rows() const noexcept { return rank() == 2 ? shape_[0] : 1; }
  std::size_t cols() const noexcept { return rank() == 0 ? 0 : shape_.back(); }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  std::span<float> row(std::size_t r) noexcept { return {data_.data() + r * cols(), cols()}; }
  std::span<const float> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols(), cols()};
  }

  float& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols() + c]; }
  float operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols() + c]; }
  float& operator[](std::size_t i) noexcept { return data_[i]; }
  float operator[](std::size_t i) const noexcept { return data_[i]; }

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<float> data_;
};

// Rows of `source` selected by `indices`, in that order.
Tensor gather_rows(const Tensor& source, std::span<const std::size_t> indices);

// Throws ShapeError unless t is rank 2.
void require_matrix(const Tensor& t, const char* what);

}  // namespace saekit
