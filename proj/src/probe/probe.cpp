#include "saekit/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "saekit/adam.hpp"
#include "saekit/error.hpp"
#include "saekit/kernels.hpp"
#include "saekit/rng.hpp"

namespace saekit {

namespace {

void check_inputs(const ProbeModel& model, const Tensor& x, std::span<const int> y) {
  require_matrix(x, "probe input");
  if (x.cols() != model.input_dim)
    throw Error(ErrorCode::ShapeError,
                "probe expects width " + std::to_string(model.input_dim) + ", got " + std::to_string(x.cols()));
  if (y.size() != x.rows())
    throw Error(ErrorCode::ShapeError, "label count " + std::to_string(y.size()) + " != rows " + std::to_string(x.rows()));
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < v.size(); ++c)
    if (v[c] > v[best]) best = c;
  return best;
}

void softmax_inplace(std::vector<double>& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& v : logits) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : logits) v /= total;
}

// Callers have already validated shapes.
double accuracy_unchecked(const ProbeModel& model, const Tensor& xc, std::span<const int> y) {
  std::size_t hits = 0;
  for (std::size_t r = 0; r < xc.rows(); ++r)
    hits += probe_predict(model, xc.row(r)) == y[r] ? 1 : 0;
  return xc.rows() == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(xc.rows());
}

Tensor center_rows(const Tensor& x, std::span<const double> mean) {
  Tensor out = x;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = static_cast<float>(double(x(r, c)) - mean[c]);
  return out;
}

ProbeModel fold_center(const ProbeModel& centered, std::span<const double> mean) {
  ProbeModel out = centered;
  for (std::size_t c = 0; c < out.num_classes; ++c)
    out.b[c] = static_cast<float>(double(centered.b[c]) - simd::dot(centered.w.row(c), mean));
  return out;
}

}  // namespace

std::vector<double> probe_logits(const ProbeModel& model, std::span<const float> x) {
  if (x.size() != model.input_dim) throw Error(ErrorCode::ShapeError, "probe input width mismatch");
  std::vector<double> out(model.num_classes);
  for (std::size_t c = 0; c < model.num_classes; ++c) out[c] = simd::dot(model.w.row(c), x) + double(model.b[c]);
  return out;
}

int probe_predict(const ProbeModel& model, std::span<const float> x) {
  return static_cast<int>(argmax(probe_logits(model, x)));
}

double probe_accuracy(const ProbeModel& model, const Tensor& x, std::span<const int> y) {
  check_inputs(model, x, y);
  if (x.rows() == 0) throw Error(ErrorCode::EmptyInput, "accuracy over zero samples");
  return accuracy_unchecked(model, x, y);
}

std::vector<std::vector<std::size_t>> confusion_matrix(const ProbeModel& model, const Tensor& x,
                                                       std::span<const int> y) {
  check_inputs(model, x, y);
  std::vector<std::vector<std::size_t>> counts(model.num_classes, std::vector<std::size_t>(model.num_classes, 0));
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (y[r] < 0 || static_cast<std::size_t>(y[r]) >= model.num_classes)
      throw Error(ErrorCode::InvalidInput, "label " + std::to_string(y[r]) + " out of range");
    ++counts[static_cast<std::size_t>(y[r])][static_cast<std::size_t>(probe_predict(model, x.row(r)))];
  }
  return counts;
}

ProbeGradients probe_gradients(const ProbeModel& model, const Tensor& x, std::span<const int> y,
                               std::span<const std::size_t> rows) {
  check_inputs(model, x, y);
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "gradient over an empty batch");
  ProbeGradients g{0.0, std::vector<double>(model.w.size(), 0.0), std::vector<double>(model.num_classes, 0.0)};
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (std::size_t r : rows) {
    const auto xr = x.row(r);
    auto p = probe_logits(model, xr);
    const auto label = static_cast<std::size_t>(y[r]);
    const double top = *std::max_element(p.begin(), p.end());
    double log_norm = 0.0;
    for (double v : p) log_norm += std::exp(v - top);
    g.loss += (std::log(log_norm) + top - p[label]) * inv;
    softmax_inplace(p);
    for (std::size_t c = 0; c < model.num_classes; ++c) {
      const double delta = (p[c] - (c == label ? 1.0 : 0.0)) * inv;
      simd::axpy(delta, xr, std::span<double>(g.w.data() + c * model.input_dim, model.input_dim));
      g.b[c] += delta;
    }
  }
  return g;
}

std::pair<ProbeModel, ProbeReport> train_probe(const Tensor& x, std::span<const int> y, std::size_t num_classes,
                                               const ProbeTrainConfig& cfg, std::optional<LabeledSet> test) {
  require_matrix(x, "probe training data");
  if (y.size() != x.rows()) throw Error(ErrorCode::ShapeError, "label count does not match rows");
  if (x.rows() < 10)
    throw Error(ErrorCode::InsufficientSamples, "probe training needs at least 10 samples, got " + std::to_string(x.rows()));
  if (num_classes == 0) throw Error(ErrorCode::InvalidInput, "num_classes must be positive");
  std::set<int> distinct;
  for (int label : y) {
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes)
      throw Error(ErrorCode::InvalidInput, "label " + std::to_string(label) + " outside [0, " +
                                               std::to_string(num_classes) + ")");
    distinct.insert(label);
  }
  if (distinct.size() < 2) throw Error(ErrorCode::DegenerateLabels, "probe labels contain a single class");
  if (cfg.batch_size == 0 || cfg.max_epochs == 0) throw Error(ErrorCode::InvalidInput, "batch size and epochs must be positive");

  const IndexSplit split = split_indices(x.rows(), cfg.val_frac, cfg.seed);
  if (split.train.empty() || split.val.empty())
    throw Error(ErrorCode::InsufficientSamples, "validation split leaves an empty part");

  const std::size_t dim = x.cols();
  std::vector<double> mean(dim, 0.0);
  for (std::size_t r : split.train)
    for (std::size_t c = 0; c < dim; ++c) mean[c] += x(r, c);
  for (double& m : mean) m /= static_cast<double>(split.train.size());

  const Tensor xc = center_rows(x, mean);
  const Tensor x_val = gather_rows(xc, split.val);
  std::vector<int> y_all(y.begin(), y.end());
  std::vector<int> y_val;
  for (std::size_t r : split.val) y_val.push_back(y[r]);

  ProbeModel model{dim, num_classes, Tensor::matrix(num_classes, dim), Tensor::vector(num_classes)};
  const AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8};
  AdamState st_w(model.w.size(), adam), st_b(model.b.size(), adam);

  Rng shuffle_rng(derive_seed(cfg.seed, 1));
  std::vector<std::size_t> order = split.train;
  ProbeReport report;
  report.n_train = split.train.size();
  report.n_val = split.val.size();
  ProbeModel best = model;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::span<const std::size_t> rows(order.data() + start, std::min(cfg.batch_size, order.size() - start));
      const ProbeGradients g = probe_gradients(model, xc, y_all, rows);
      if (!std::isfinite(g.loss))
        throw Error(ErrorCode::TrainingDiverged, "probe loss became non-finite at epoch " + std::to_string(epoch));
      epoch_loss += g.loss * static_cast<double>(rows.size());
      adam_step(model.w.data(), g.w, st_w);
      adam_step(model.b.data(), g.b, st_b);
    }
    report.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    const double acc = accuracy_unchecked(model, x_val, y_val);
    report.val_accuracy.push_back(acc);
    if (epoch == 0 || acc > report.best_val_accuracy) {
      report.best_val_accuracy = acc;
      report.best_epoch = epoch;
      best = model;
    } else if (epoch - report.best_epoch >= cfg.patience) {
      break;
    }
  }

  ProbeModel folded = fold_center(best, mean);
  if (test && test->x != nullptr) {
    report.test_accuracy = probe_accuracy(folded, *test->x, test->y);
    report.confusion = confusion_matrix(folded, *test->x, test->y);
    report.n_test = test->x->rows();
  }
  return {std::move(folded), std::move(report)};
}

LayerSweep layer_sweep(std::span<const LayerInput> layers, const ProbeTrainConfig& cfg) {
  if (layers.empty()) throw Error(ErrorCode::InvalidInput, "layer sweep needs at least one layer");
  LayerSweep sweep;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Embeddings& e = *layers[i].data;
    if (e.test.size() == 0) throw Error(ErrorCode::EmptyInput, "layer '" + layers[i].name + "' has no test split");
    const auto [model, report] =
        train_probe(e.train.x, e.train.labels, e.num_classes, cfg, LabeledSet{&e.test.x, e.test.labels});
    sweep.ranked.push_back({layers[i].name, i, report.best_val_accuracy, *report.test_accuracy, report.n_train + report.n_val,
                            report.n_test});
  }
  std::stable_sort(sweep.ranked.begin(), sweep.ranked.end(), [](const LayerResult& a, const LayerResult& b) {
    return a.test_accuracy > b.test_accuracy;
  });
  sweep.selected = sweep.ranked.front().layer_index;
  return sweep;
}

}  // namespace saekit
