#include "saekit/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "saekit/error.hpp"
#include "saekit/kernels.hpp"
#include "saekit/special.hpp"

namespace saekit {

Design::Design(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Design Design::from_tensor(const Tensor& x) {
  require_matrix(x, "design matrix");
  Design d(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) d(r, c) = x(r, c);
  return d;
}

Design Design::from_rows(const Tensor& x, std::span<const std::size_t> rows) {
  require_matrix(x, "design matrix");
  Design d(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < x.cols(); ++c) d(i, c) = x(rows[i], c);
  return d;
}

std::size_t LassoModel::nnz() const noexcept {
  return static_cast<std::size_t>(std::count_if(beta.begin(), beta.end(), [](double b) { return b != 0.0; }));
}

namespace {

std::vector<double> centered(std::span<const double> f, double& mean) {
  mean = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] - mean;
  return out;
}

void check(const Design& z, std::span<const double> f) {
  if (z.rows() != f.size())
    throw Error(ErrorCode::ShapeError, "design has " + std::to_string(z.rows()) + " rows, target has " +
                                           std::to_string(f.size()));
  if (z.rows() < 2) throw Error(ErrorCode::InsufficientSamples, "lasso needs at least 2 samples");
}

}  // namespace

double lasso_lambda_max(const Design& z, std::span<const double> f) {
  check(z, f);
  double mean = 0.0;
  const auto fc = centered(f, mean);
  double best = 0.0;
  for (std::size_t j = 0; j < z.cols(); ++j)
    best = std::max(best, std::abs(simd::dot(z.col(j), std::span<const double>(fc))));
  return best / static_cast<double>(z.rows());
}

LassoModel fit_lasso(const Design& z, std::span<const double> f, double lam, const LassoOptions& opts) {
  check(z, f);
  if (!(lam >= 0.0) || !std::isfinite(lam)) throw Error(ErrorCode::DomainError, "lasso lambda must be finite and >= 0");
  const auto m = static_cast<double>(z.rows());
  const std::size_t p = z.cols();

  LassoModel model;
  model.lam = lam;
  model.beta.assign(p, 0.0);
  std::vector<double> residual = centered(f, model.intercept);

  std::vector<double> col_sq(p);
  for (std::size_t j = 0; j < p; ++j) {
    col_sq[j] = simd::dot(z.col(j), z.col(j)) / m;
    if (!(col_sq[j] > 1e-12)) {
      col_sq[j] = 0.0;
      ++model.skipped_columns;
    }
  }

  for (model.iterations = 0; model.iterations < opts.max_iter;) {
    ++model.iterations;
    double max_delta = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      if (col_sq[j] == 0.0) continue;
      const double rho = simd::dot(z.col(j), std::span<const double>(residual)) / m + col_sq[j] * model.beta[j];
      const double updated = soft_threshold(rho, lam) / col_sq[j];
      const double delta = updated - model.beta[j];
      if (delta != 0.0) {
        simd::axpy(-delta, z.col(j), std::span<double>(residual));
        model.beta[j] = updated;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (max_delta < opts.tol) {
      model.converged = true;
      break;
    }
  }
  return model;
}

std::vector<double> lasso_predict(const LassoModel& model, const Design& z) {
  if (z.cols() != model.beta.size()) throw Error(ErrorCode::ShapeError, "design width does not match coefficients");
  std::vector<double> out(z.rows(), model.intercept);
  for (std::size_t j = 0; j < z.cols(); ++j)
    if (model.beta[j] != 0.0) simd::axpy(model.beta[j], z.col(j), std::span<double>(out));
  return out;
}

}  // namespace saekit
