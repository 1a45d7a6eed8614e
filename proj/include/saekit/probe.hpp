#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "saekit/dataset.hpp"
#include "saekit/tensor.hpp"

namespace saekit {

// Linear softmax classifier: logits = w x + b.
struct ProbeModel {
  std::size_t input_dim = 0;
  std::size_t num_classes = 0;
  Tensor w;  // [num_classes, input_dim]
  Tensor b;  // [num_classes]
};

std::vector<double> probe_logits(const ProbeModel& model, std::span<const float> x);

// argmax of the logits; ties go to the lowest class index.
int probe_predict(const ProbeModel& model, std::span<const float> x);

double probe_accuracy(const ProbeModel& model, const Tensor& x, std::span<const int> y);

// counts[true][predicted]
std::vector<std::vector<std::size_t>> confusion_matrix(const ProbeModel& model, const Tensor& x,
                                                       std::span<const int> y);

// Mean softmax cross-entropy over `rows` and its gradient.
struct ProbeGradients {
  double loss = 0.0;
  std::vector<double> w;
  std::vector<double> b;
};

ProbeGradients probe_gradients(const ProbeModel& model, const Tensor& x, std::span<const int> y,
                               std::span<const std::size_t> rows);

struct ProbeTrainConfig {
  double val_frac = 0.2;
  std::uint64_t seed = 0;
  double lr = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 200;
  std::size_t patience = 30;
};

struct ProbeReport {
  double best_val_accuracy = 0.0;
  std::size_t best_epoch = 0;
  std::vector<double> train_loss;    // per epoch
  std::vector<double> val_accuracy;  // per epoch
  std::optional<double> test_accuracy;
  std::vector<std::vector<std::size_t>> confusion;  // on the test set, empty without one
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  std::size_t n_test = 0;

  friend bool operator==(const ProbeReport&, const ProbeReport&) = default;
};

struct LabeledSet {
  const Tensor* x = nullptr;
  std::span<const int> y;
};

// Holds out val_frac of (x, y) for model selection and keeps the epoch with the
// best validation accuracy. Inputs are centered on the training-part mean
// during optimisation; the returned model has the shift folded into b.
std::pair<ProbeModel, ProbeReport> train_probe(const Tensor& x, std::span<const int> y, std::size_t num_classes,
                                               const ProbeTrainConfig& cfg,
                                               std::optional<LabeledSet> test = std::nullopt);

struct LayerInput {
  std::string name;
  const Embeddings* data = nullptr;
};

struct LayerResult {
  std::string name;
  std::size_t layer_index = 0;  // position in the input list
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

struct LayerSweep {
  std::vector<LayerResult> ranked;  // best first
  std::size_t selected = 0;         // layer_index of the winner
};

// One probe per layer; ranked by test accuracy, ties to the lower layer index.
LayerSweep layer_sweep(std::span<const LayerInput> layers, const ProbeTrainConfig& cfg);

}  // namespace saekit
