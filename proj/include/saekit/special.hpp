#pragma once

namespace saekit {

// sign(z) * max(|z| - lam, 0); lam must be >= 0.
double soft_threshold(double z, double lam);

// psi(x) for x > 0: upward recurrence to x >= 6, then the asymptotic series.
double digamma(double x);

}  // namespace saekit
