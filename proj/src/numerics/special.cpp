#include "saekit/special.hpp"

#include <cmath>
#include <string>

#include "saekit/error.hpp"

namespace saekit {

double soft_threshold(double z, double lam) {
  if (lam < 0.0) throw Error(ErrorCode::DomainError, "soft_threshold: negative lambda");
  if (z > lam) return z - lam;
  if (z < -lam) return z + lam;
  return 0.0;
}

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw Error(ErrorCode::DomainError, "digamma requires finite x > 0, got " + std::to_string(x));
  double shift = 0.0;
  while (x < 6.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  // ln x - 1/(2x) - sum_n B_2n / (2n x^2n), through B_14; truncation < 1e-13 at x = 6.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 * (1.0 / 12)))))));
  return shift + std::log(x) - 0.5 * inv - series;
}

}  // namespace saekit
