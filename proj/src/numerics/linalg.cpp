#include "saekit/linalg.hpp"

#include <string>

#include "saekit/error.hpp"
#include "saekit/kernels.hpp"

namespace saekit {

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose operand");
  Tensor out = Tensor::matrix(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul lhs");
  require_matrix(b, "matmul rhs");
  if (a.cols() != b.rows())
    throw Error(ErrorCode::ShapeError, "matmul: " + std::to_string(a.rows()) + "x" +
                                           std::to_string(a.cols()) + " by " +
                                           std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  const Tensor bt = transpose(b);
  Tensor out = Tensor::matrix(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < b.cols(); ++c)
      out(r, c) = static_cast<float>(simd::dot(a.row(r), bt.row(c)));
  return out;
}

Tensor matvec(const Tensor& a, std::span<const float> x) {
  require_matrix(a, "matvec lhs");
  if (a.cols() != x.size())
    throw Error(ErrorCode::ShapeError, "matvec: matrix has " + std::to_string(a.cols()) +
                                           " columns, vector has " + std::to_string(x.size()));
  Tensor out = Tensor::vector(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) out[r] = static_cast<float>(simd::dot(a.row(r), x));
  return out;
}

}  // namespace saekit
