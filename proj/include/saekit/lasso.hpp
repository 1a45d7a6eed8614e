#pragma once

#include <span>
#include <string>
#include <vector>

#include "saekit/tensor.hpp"

namespace saekit {

// Column-major float64 design matrix for coordinate descent.
class Design {
 public:
  Design() = default;
  Design(std::size_t rows, std::size_t cols);

  static Design from_tensor(const Tensor& x);
  static Design from_rows(const Tensor& x, std::span<const std::size_t> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<double> col(std::size_t j) noexcept { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const noexcept { return {data_.data() + j * rows_, rows_}; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[c * rows_ + r]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[c * rows_ + r]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct LassoOptions {
  std::size_t max_iter = 1000;
  double tol = 1e-6;  // on the largest coefficient change in one sweep
};

struct LassoModel {
  std::vector<double> beta;
  double intercept = 0.0;
  double lam = 0.0;
  std::string factor_name;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t skipped_columns = 0;  // zero-variance columns left at beta = 0

  std::size_t nnz() const noexcept;
};

// Smallest lambda with an all-zero solution: max_j |z_j^T (f - mean f)| / M.
double lasso_lambda_max(const Design& z, std::span<const double> f);

// Cyclic coordinate descent on (1/2M) ||(f - mean f) - Z beta||^2 + lam ||beta||_1.
// Z is expected to be column-centered; the intercept is mean(f).
LassoModel fit_lasso(const Design& z, std::span<const double> f, double lam, const LassoOptions& opts = {});

std::vector<double> lasso_predict(const LassoModel& model, const Design& z);

}  // namespace saekit
