#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "saekit/tensor.hpp"

namespace saekit {

// TopK sparse autoencoder: z = TopK(ReLU(w_enc x + b_enc)), x_hat = w_dec z.
// The decoder carries no bias.
struct SaeModel {
  std::size_t d_in = 0;
  std::size_t n_latent = 0;
  std::size_t k = 0;
  Tensor w_enc;  // [n_latent, d_in]
  Tensor b_enc;  // [n_latent]
  Tensor w_dec;  // [d_in, n_latent]

  // Shapes, 1 <= k <= n_latent, n_latent > d_in, finite weights.
  void validate() const;
};

// floor((1 - sparsity) * n_latent); throws SparsityTooHigh when that is 0.
std::size_t sparsity_to_k(double sparsity, std::size_t n_latent);

// ReLU, then keep the k largest values (ties keep the lower index). Fewer
// than k values survive when fewer than k are positive.
void topk_relu_inplace(std::span<float> values, std::size_t k);
std::vector<float> topk_relu(std::span<const float> pre_acts, std::size_t k);

// Random init: w_enc uniform in +-1/sqrt(d_in), b_enc = 0, w_dec = w_enc^T
// with unit-norm columns.
SaeModel init_sae(std::size_t d_in, std::size_t n_latent, std::size_t k, std::uint64_t seed);

Tensor encode(const SaeModel& model, std::span<const float> x);
Tensor encode_batch(const SaeModel& model, const Tensor& x);
Tensor decode(const SaeModel& model, std::span<const float> z);

// Squared L2 norm of the residual for one sample; for matrices, the mean of
// the per-row values.
double mse(std::span<const float> x_hat, std::span<const float> x);
double mse(const Tensor& x_hat, const Tensor& x);

double eval_reconstruction(const SaeModel& model, const Tensor& x);

// Batch loss (mean per-sample squared error) and its exact gradient with the
// TopK support of each sample treated as fixed. Layouts match SaeModel.
struct SaeGradients {
  double loss = 0.0;
  std::vector<double> w_enc;
  std::vector<double> b_enc;
  std::vector<double> w_dec;
};

SaeGradients sae_gradients(const SaeModel& model, const Tensor& x, std::span<const std::size_t> rows);

struct SaeTrainConfig {
  double sparsity = 0.95;
  std::size_t n_latent = 2048;
  double lr = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 100;
  std::size_t patience = 20;
  std::uint64_t seed = 0;
  // Called after every optimiser step with the 0-based global step index and
  // the batch loss that produced it.
  std::function<void(std::size_t step, double loss)> on_step;
};

struct SaeTrainReport {
  std::vector<double> train_mse;  // per epoch, averaged over the minibatch passes
  std::vector<double> val_mse;    // per epoch, eval_reconstruction on the validation set
  std::size_t best_epoch = 0;     // 0-based index into val_mse
  double best_val_mse = 0.0;
  std::size_t k = 0;
};

// Minibatch Adam on the reconstruction loss. Returns the parameters from the
// epoch with the lowest validation MSE; stops after `patience` epochs without
// improvement.
std::pair<SaeModel, SaeTrainReport> train_sae(const Tensor& x_train, const Tensor& x_val,
                                              const SaeTrainConfig& cfg);

// Checkpoint layout (little-endian):
//   uint64 n, then n bytes of JSON
//     {"d_in","n_latent","k","sparsity","seed","best_epoch","best_val_mse"}
//   then three times: uint64 n, n bytes of ATNS (w_enc, b_enc, w_dec)
struct SaeCheckpointInfo {
  double sparsity = 0.0;
  std::uint64_t seed = 0;
  std::size_t best_epoch = 0;
  double best_val_mse = 0.0;

  friend bool operator==(const SaeCheckpointInfo&, const SaeCheckpointInfo&) = default;
};

std::vector<std::uint8_t> encode_checkpoint(const SaeModel& model, const SaeCheckpointInfo& info);
std::pair<SaeModel, SaeCheckpointInfo> decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const std::filesystem::path& path, const SaeModel& model, const SaeCheckpointInfo& info);
std::pair<SaeModel, SaeCheckpointInfo> load_checkpoint(const std::filesystem::path& path);

}  // namespace saekit
