#include "saekit/sae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "saekit/adam.hpp"
#include "saekit/error.hpp"
#include "saekit/kernels.hpp"
#include "saekit/linalg.hpp"
#include "saekit/rng.hpp"

namespace saekit {

void SaeModel::validate() const {
  if (d_in == 0 || n_latent == 0) throw Error(ErrorCode::ShapeError, "SAE dimensions must be positive");
  if (n_latent <= d_in)
    throw Error(ErrorCode::ShapeError, "SAE must be overcomplete: n_latent " + std::to_string(n_latent) +
                                           " <= d_in " + std::to_string(d_in));
  if (k < 1 || k > n_latent) throw Error(ErrorCode::DomainError, "k must lie in [1, n_latent]");
  if (w_enc.shape() != std::vector<std::size_t>{n_latent, d_in})
    throw Error(ErrorCode::ShapeError, "w_enc must be [n_latent, d_in]");
  if (b_enc.shape() != std::vector<std::size_t>{n_latent})
    throw Error(ErrorCode::ShapeError, "b_enc must be [n_latent]");
  if (w_dec.shape() != std::vector<std::size_t>{d_in, n_latent})
    throw Error(ErrorCode::ShapeError, "w_dec must be [d_in, n_latent]");
  if (!w_enc.all_finite() || !b_enc.all_finite() || !w_dec.all_finite())
    throw Error(ErrorCode::NonFinite, "SAE weights contain non-finite values");
}

std::size_t sparsity_to_k(double sparsity, std::size_t n_latent) {
  if (!(sparsity > 0.0 && sparsity < 1.0)) throw Error(ErrorCode::DomainError, "sparsity must lie in (0, 1)");
  if (n_latent == 0) throw Error(ErrorCode::DomainError, "n_latent must be positive");
  const auto k = static_cast<std::size_t>(std::floor((1.0 - sparsity) * static_cast<double>(n_latent)));
  if (k == 0)
    throw Error(ErrorCode::SparsityTooHigh, "sparsity " + std::to_string(sparsity) + " leaves no active latent of " +
                                                std::to_string(n_latent));
  return k;
}

void topk_relu_inplace(std::span<float> values, std::size_t k) {
  std::vector<std::size_t> positive;
  positive.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > 0.0f)
      positive.push_back(i);
    else
      values[i] = 0.0f;
  }
  if (positive.size() <= k) return;
  const auto ranks_before = [&](std::size_t a, std::size_t b) {
    return values[a] > values[b] || (values[a] == values[b] && a < b);
  };
  std::nth_element(positive.begin(), positive.begin() + static_cast<std::ptrdiff_t>(k), positive.end(),
                   ranks_before);
  for (auto it = positive.begin() + static_cast<std::ptrdiff_t>(k); it != positive.end(); ++it) values[*it] = 0.0f;
}

std::vector<float> topk_relu(std::span<const float> pre_acts, std::size_t k) {
  std::vector<float> out(pre_acts.begin(), pre_acts.end());
  topk_relu_inplace(out, k);
  return out;
}

SaeModel init_sae(std::size_t d_in, std::size_t n_latent, std::size_t k, std::uint64_t seed) {
  SaeModel m{d_in, n_latent, k, Tensor::matrix(n_latent, d_in), Tensor::vector(n_latent),
             Tensor::matrix(d_in, n_latent)};
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
  for (float& w : m.w_enc.data()) w = static_cast<float>(rng.uniform(-bound, bound));
  for (std::size_t j = 0; j < n_latent; ++j) {
    const double norm = std::sqrt(simd::dot(m.w_enc.row(j), m.w_enc.row(j)));
    for (std::size_t d = 0; d < d_in; ++d)
      m.w_dec(d, j) = norm > 0.0 ? static_cast<float>(m.w_enc(j, d) / norm) : 0.0f;
  }
  m.validate();
  return m;
}

namespace {

void check_input(const SaeModel& model, std::size_t width) {
  if (width != model.d_in)
    throw Error(ErrorCode::ShapeError,
                "input width " + std::to_string(width) + " != d_in " + std::to_string(model.d_in));
}

void encode_into(const Tensor& w_enc, const Tensor& b_enc, std::size_t k, std::span<const float> x,
                 std::span<float> z) {
  for (std::size_t j = 0; j < z.size(); ++j)
    z[j] = static_cast<float>(simd::dot(w_enc.row(j), x) + double(b_enc[j]));
  topk_relu_inplace(z, k);
}

// Training-time parameter layout: the decoder is held as atoms [n_latent, d_in]
// (rows of w_dec^T) so that reconstruction and its gradient are contiguous
// axpy/dot calls. Accumulation order per output coordinate matches decode().
struct Params {
  std::size_t k;
  Tensor w_enc;
  Tensor b_enc;
  Tensor atoms;
};

struct Grads {
  std::vector<double> w_enc, b_enc, atoms;

  explicit Grads(const Params& p)
      : w_enc(p.w_enc.size(), 0.0), b_enc(p.b_enc.size(), 0.0), atoms(p.atoms.size(), 0.0) {}

  void zero() {
    std::fill(w_enc.begin(), w_enc.end(), 0.0);
    std::fill(b_enc.begin(), b_enc.end(), 0.0);
    std::fill(atoms.begin(), atoms.end(), 0.0);
  }
};

Params to_params(const SaeModel& m) { return {m.k, m.w_enc, m.b_enc, transpose(m.w_dec)}; }

SaeModel to_model(const Params& p) {
  return {p.w_enc.cols(), p.w_enc.rows(), p.k, p.w_enc, p.b_enc, transpose(p.atoms)};
}

struct Workspace {
  std::vector<float> z;
  std::vector<std::size_t> active;
  std::vector<double> act;  // float64 pre-activations of the active latents
  std::vector<double> x_hat;
  std::vector<double> g;

  Workspace(std::size_t d_in, std::size_t n_latent) : z(n_latent), x_hat(d_in), g(d_in) {}
};

// Adds the gradient of sum_rows ||x_hat - x||^2 / rows.size() into `grads`
// and returns that loss.
double accumulate_batch(const Params& p, const Tensor& x, std::span<const std::size_t> rows, Grads& grads,
                        Workspace& ws) {
  const std::size_t d_in = p.w_enc.cols();
  const double scale = 2.0 / static_cast<double>(rows.size());
  double loss = 0.0;
  for (std::size_t r : rows) {
    const auto xr = x.row(r);
    encode_into(p.w_enc, p.b_enc, p.k, xr, ws.z);
    ws.active.clear();
    ws.act.clear();
    for (std::size_t j = 0; j < ws.z.size(); ++j) {
      if (ws.z[j] <= 0.0f) continue;
      ws.active.push_back(j);
      ws.act.push_back(simd::dot(p.w_enc.row(j), xr) + double(p.b_enc[j]));
    }

    std::fill(ws.x_hat.begin(), ws.x_hat.end(), 0.0);
    for (std::size_t a = 0; a < ws.active.size(); ++a) simd::axpy(ws.act[a], p.atoms.row(ws.active[a]), ws.x_hat);

    double sample_loss = 0.0;
    for (std::size_t d = 0; d < d_in; ++d) {
      const double diff = ws.x_hat[d] - double(xr[d]);
      sample_loss += diff * diff;
      ws.g[d] = scale * diff;
    }
    loss += sample_loss;

    for (std::size_t a = 0; a < ws.active.size(); ++a) {
      const std::size_t j = ws.active[a];
      const std::span<double> atom_grad(grads.atoms.data() + j * d_in, d_in);
      simd::axpy(ws.act[a], std::span<const double>(ws.g), atom_grad);
      const double dz = simd::dot(p.atoms.row(j), std::span<const double>(ws.g));
      simd::axpy(dz, xr, std::span<double>(grads.w_enc.data() + j * d_in, d_in));
      grads.b_enc[j] += dz;
    }
  }
  return loss / static_cast<double>(rows.size());
}

}  // namespace

Tensor encode(const SaeModel& model, std::span<const float> x) {
  check_input(model, x.size());
  Tensor z = Tensor::vector(model.n_latent);
  encode_into(model.w_enc, model.b_enc, model.k, x, z.data());
  return z;
}

Tensor encode_batch(const SaeModel& model, const Tensor& x) {
  require_matrix(x, "encode_batch input");
  check_input(model, x.cols());
  Tensor z = Tensor::matrix(x.rows(), model.n_latent);
  for (std::size_t r = 0; r < x.rows(); ++r) encode_into(model.w_enc, model.b_enc, model.k, x.row(r), z.row(r));
  return z;
}

Tensor decode(const SaeModel& model, std::span<const float> z) {
  if (z.size() != model.n_latent)
    throw Error(ErrorCode::ShapeError,
                "code width " + std::to_string(z.size()) + " != n_latent " + std::to_string(model.n_latent));
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < z.size(); ++j)
    if (z[j] != 0.0f) active.push_back(j);
  Tensor out = Tensor::vector(model.d_in);
  for (std::size_t d = 0; d < model.d_in; ++d) {
    double acc = 0.0;
    for (std::size_t j : active) acc += double(z[j]) * double(model.w_dec(d, j));
    out[d] = static_cast<float>(acc);
  }
  return out;
}

double mse(std::span<const float> x_hat, std::span<const float> x) {
  if (x_hat.size() != x.size()) throw Error(ErrorCode::ShapeError, "mse operands differ in length");
  return simd::sq_dist(x_hat, x);
}

double mse(const Tensor& x_hat, const Tensor& x) {
  if (x_hat.shape() != x.shape()) throw Error(ErrorCode::ShapeError, "mse operands differ in shape");
  if (x.rank() == 1) return mse(x_hat.data(), x.data());
  if (x.rows() == 0) throw Error(ErrorCode::EmptyInput, "mse over zero samples");
  double total = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) total += simd::sq_dist(x_hat.row(r), x.row(r));
  return total / static_cast<double>(x.rows());
}

double eval_reconstruction(const SaeModel& model, const Tensor& x) {
  require_matrix(x, "eval_reconstruction input");
  check_input(model, x.cols());
  if (x.rows() == 0) throw Error(ErrorCode::EmptyInput, "eval_reconstruction over zero samples");
  double total = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const Tensor z = encode(model, x.row(r));
    total += simd::sq_dist(decode(model, z.data()).data(), x.row(r));
  }
  return total / static_cast<double>(x.rows());
}

SaeGradients sae_gradients(const SaeModel& model, const Tensor& x, std::span<const std::size_t> rows) {
  require_matrix(x, "sae_gradients input");
  check_input(model, x.cols());
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "gradient over an empty batch");
  const Params p = to_params(model);
  Grads grads(p);
  Workspace ws(model.d_in, model.n_latent);
  SaeGradients out;
  out.loss = accumulate_batch(p, x, rows, grads, ws);
  out.w_enc = std::move(grads.w_enc);
  out.b_enc = std::move(grads.b_enc);
  out.w_dec.resize(grads.atoms.size());
  for (std::size_t j = 0; j < model.n_latent; ++j)
    for (std::size_t d = 0; d < model.d_in; ++d) out.w_dec[d * model.n_latent + j] = grads.atoms[j * model.d_in + d];
  return out;
}

std::pair<SaeModel, SaeTrainReport> train_sae(const Tensor& x_train, const Tensor& x_val,
                                              const SaeTrainConfig& cfg) {
  require_matrix(x_train, "SAE training data");
  require_matrix(x_val, "SAE validation data");
  if (x_train.cols() != x_val.cols())
    throw Error(ErrorCode::ShapeError, "train and validation widths differ");
  if (cfg.batch_size == 0 || x_train.rows() < cfg.batch_size)
    throw Error(ErrorCode::InvalidInput, "need at least batch_size (" + std::to_string(cfg.batch_size) +
                                             ") training rows, got " + std::to_string(x_train.rows()));
  if (x_val.rows() == 0) throw Error(ErrorCode::EmptyInput, "empty validation set");
  if (cfg.max_epochs == 0) throw Error(ErrorCode::InvalidInput, "max_epochs must be positive");

  const std::size_t d_in = x_train.cols();
  const std::size_t k = sparsity_to_k(cfg.sparsity, cfg.n_latent);
  Params p = to_params(init_sae(d_in, cfg.n_latent, k, cfg.seed));
  Grads grads(p);
  Workspace ws(d_in, cfg.n_latent);

  const AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8};
  AdamState st_enc(p.w_enc.size(), adam), st_bias(p.b_enc.size(), adam), st_dec(p.atoms.size(), adam);

  Rng shuffle_rng(derive_seed(cfg.seed, 1));
  std::vector<std::size_t> order(x_train.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});

  SaeTrainReport report;
  report.k = k;
  SaeModel best;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0, batch = 0; start < order.size(); start += cfg.batch_size, ++batch) {
      const std::span<const std::size_t> rows(order.data() + start, std::min(cfg.batch_size, order.size() - start));
      grads.zero();
      const double loss = accumulate_batch(p, x_train, rows, grads, ws);
      if (!std::isfinite(loss))
        throw Error(ErrorCode::TrainingDiverged,
                    "non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch));
      epoch_loss += loss * static_cast<double>(rows.size());
      adam_step(p.w_enc.data(), grads.w_enc, st_enc);
      adam_step(p.b_enc.data(), grads.b_enc, st_bias);
      adam_step(p.atoms.data(), grads.atoms, st_dec);
      if (cfg.on_step) cfg.on_step(step, loss);
      ++step;
    }
    report.train_mse.push_back(epoch_loss / static_cast<double>(order.size()));

    SaeModel current = to_model(p);
    const double val = eval_reconstruction(current, x_val);
    if (!std::isfinite(val))
      throw Error(ErrorCode::TrainingDiverged, "non-finite validation MSE at epoch " + std::to_string(epoch));
    report.val_mse.push_back(val);
    if (epoch == 0 || val < report.best_val_mse) {
      report.best_val_mse = val;
      report.best_epoch = epoch;
      best = std::move(current);
    } else if (epoch - report.best_epoch >= cfg.patience) {
      break;
    }
  }
  return {std::move(best), std::move(report)};
}

}  // namespace saekit
