#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "saekit/error.hpp"
#include "saekit/probe.hpp"

using namespace saekit;

namespace {

ProbeModel random_probe(std::mt19937_64& gen, std::size_t p, std::size_t c) {
  return {p, c, oracle::random_matrix(gen, c, p), Tensor({c}, oracle::random_floats(gen, c))};
}

struct Blobs {
  Tensor x;
  std::vector<int> y;
};

// Class means 0.5 apart on the first axis with sigma 0.1: a 5 sigma margin.
Blobs two_blobs(std::size_t m, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<float> nd(0.0f, 0.1f);
  Blobs b{Tensor::matrix(m, 2), std::vector<int>(m)};
  for (std::size_t r = 0; r < m; ++r) {
    b.y[r] = static_cast<int>(r % 2);
    b.x(r, 0) = (b.y[r] ? 0.25f : -0.25f) + nd(gen);
    b.x(r, 1) = nd(gen);
  }
  return b;
}

}  // namespace

TEST_CASE("probe_predict and accuracy") {
  SUBCASE("zero model predicts class 0") {
    const ProbeModel m{3, 4, Tensor::matrix(4, 3), Tensor::vector(4)};
    const Tensor x({4, 3}, {1, 2, 3, -1, 0, 5, 2, 2, 2, 9, 9, 9});
    const std::vector<int> y{0, 1, 0, 3};
    CHECK(probe_accuracy(m, x, y) == 0.5);
  }
  SUBCASE("prototypes map to their own class") {
    ProbeModel m{3, 3, Tensor::matrix(3, 3), Tensor::vector(3)};
    for (std::size_t c = 0; c < 3; ++c) m.w(c, c) = 1.0f;
    const Tensor x({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    CHECK(probe_accuracy(m, x, std::vector<int>{0, 1, 2}) == 1.0);
  }
  SUBCASE("brute-force argmax oracle") {
    std::mt19937_64 gen(8);
    const ProbeModel m = random_probe(gen, 6, 5);
    const Tensor x = oracle::random_matrix(gen, 20, 6);
    std::vector<int> y(20);
    for (std::size_t r = 0; r < 20; ++r) {
      int best = 0;
      long double best_v = -1e300L;
      for (std::size_t c = 0; c < 5; ++c) {
        long double v = m.b[c];
        for (std::size_t t = 0; t < 6; ++t) v += (long double)m.w(c, t) * x(r, t);
        if (v > best_v) best_v = v, best = static_cast<int>(c);
      }
      y[r] = best;
      CHECK(probe_predict(m, x.row(r)) == best);
    }
    CHECK(probe_accuracy(m, x, y) == 1.0);

    // 3 * logit + 1 for every class: strictly increasing, same argmax.
    ProbeModel scaled = m;
    for (auto& v : scaled.w.data()) v *= 3.0f;
    for (auto& v : scaled.b.data()) v = v * 3.0f + 1.0f;
    CHECK(probe_accuracy(scaled, x, y) == 1.0);
  }
  SUBCASE("confusion matrix") {
    std::mt19937_64 gen(9);
    const ProbeModel m = random_probe(gen, 4, 3);
    const Tensor x = oracle::random_matrix(gen, 30, 4);
    std::vector<int> y(30);
    for (auto& v : y) v = static_cast<int>(gen() % 3);
    const auto cm = confusion_matrix(m, x, y);
    std::size_t total = 0, trace = 0;
    for (std::size_t c = 0; c < 3; ++c) {
      std::size_t row = 0;
      for (std::size_t k = 0; k < 3; ++k) row += cm[c][k];
      CHECK(row == static_cast<std::size_t>(std::count(y.begin(), y.end(), static_cast<int>(c))));
      total += row;
      trace += cm[c][c];
    }
    CHECK(total == 30);
    CHECK(double(trace) / 30 == doctest::Approx(probe_accuracy(m, x, y)));
  }
  SUBCASE("shape errors") {
    std::mt19937_64 gen(10);
    const ProbeModel m = random_probe(gen, 4, 3);
    CHECK_THROWS_AS(probe_accuracy(m, Tensor::matrix(2, 5), std::vector<int>{0, 1}), Error);
    CHECK_THROWS_AS(probe_accuracy(m, Tensor::matrix(2, 4), std::vector<int>{0}), Error);
  }
}

TEST_CASE("cross-entropy gradient matches central differences") {
  std::mt19937_64 gen(123);
  for (int trial = 0; trial < 20; ++trial) {
    const ProbeModel m = random_probe(gen, 5, 3);
    const Tensor x = oracle::random_matrix(gen, 7, 5, -2.0f, 2.0f);
    std::vector<int> y(7);
    for (auto& v : y) v = static_cast<int>(gen() % 3);
    const std::vector<std::size_t> rows{0, 1, 2, 3, 4, 5, 6};
    const ProbeGradients g = probe_gradients(m, x, y, rows);
    std::vector<double> w(m.w.data().begin(), m.w.data().end()), b(m.b.data().begin(), m.b.data().end());
    auto loss = [&] { return oracle::cross_entropy(w, b, x, y); };
    CHECK(oracle::rel_err(g.loss, loss()) <= 1e-6);
    CHECK(oracle::max_rel_err(g.w, oracle::central_diff(w, loss, 1e-3)) <= 1e-4);
    CHECK(oracle::max_rel_err(g.b, oracle::central_diff(b, loss, 1e-3)) <= 1e-4);
  }
}

TEST_CASE("train_probe") {
  SUBCASE("separable blobs") {
    const Blobs b = two_blobs(200, 1);
    ProbeTrainConfig cfg;
    cfg.seed = 3;
    const auto [model, report] = train_probe(b.x, b.y, 2, cfg);
    CHECK(report.best_val_accuracy == 1.0);
    CHECK(report.n_train == 160);
    CHECK(report.n_val == 40);
    CHECK_FALSE(report.test_accuracy.has_value());
    CHECK(report.val_accuracy[report.best_epoch] == report.best_val_accuracy);
    CHECK(probe_accuracy(model, b.x, b.y) >= 0.99);
  }
  SUBCASE("random labels stay near chance") {
    std::mt19937_64 gen(44);
    const Tensor x = oracle::random_matrix(gen, 500, 16);
    const Tensor xt = oracle::random_matrix(gen, 500, 16);
    std::vector<int> y(500), yt(500);
    for (auto& v : y) v = static_cast<int>(gen() % 10);
    for (auto& v : yt) v = static_cast<int>(gen() % 10);
    ProbeTrainConfig cfg;
    cfg.seed = 5;
    cfg.max_epochs = 50;
    const auto [model, report] = train_probe(x, y, 10, cfg, LabeledSet{&xt, yt});
    REQUIRE(report.test_accuracy.has_value());
    CHECK(*report.test_accuracy >= 0.02);
    CHECK(*report.test_accuracy <= 0.25);
    CHECK(report.n_test == 500);
    CHECK(report.confusion.size() == 10);
  }
  SUBCASE("determinism") {
    const Blobs b = two_blobs(120, 2);
    ProbeTrainConfig cfg;
    cfg.seed = 17;
    cfg.max_epochs = 20;
    const auto r1 = train_probe(b.x, b.y, 2, cfg, LabeledSet{&b.x, b.y});
    const auto r2 = train_probe(b.x, b.y, 2, cfg, LabeledSet{&b.x, b.y});
    CHECK(r1.second == r2.second);
    CHECK(r1.first.w == r2.first.w);
    CHECK(r1.first.b == r2.first.b);
  }
  SUBCASE("centering invariance") {
    // Dyadic values and a power-of-two training part keep the centering exact.
    std::mt19937_64 gen(6);
    const std::size_t m = 80;  // 64 train + 16 val
    Tensor x = Tensor::matrix(m, 4);
    std::vector<int> y(m);
    for (std::size_t r = 0; r < m; ++r) {
      y[r] = static_cast<int>(r % 3);
      for (std::size_t t = 0; t < 4; ++t)
        x(r, t) = static_cast<float>(static_cast<int>(gen() % 64) - 32) / 16.0f + (t == 0 ? float(y[r]) : 0.0f);
    }
    Tensor shifted = x;
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t t = 0; t < 4; ++t) shifted(r, t) += static_cast<float>(t + 1) * 8.0f;
    ProbeTrainConfig cfg;
    cfg.seed = 12;
    cfg.max_epochs = 40;
    const auto a = train_probe(x, y, 3, cfg);
    const auto s = train_probe(shifted, y, 3, cfg);
    CHECK(a.second.val_accuracy == s.second.val_accuracy);
    CHECK(a.second.train_loss == s.second.train_loss);
    CHECK(a.first.w == s.first.w);
    CHECK(probe_accuracy(a.first, x, y) == probe_accuracy(s.first, shifted, y));
  }
  SUBCASE("errors") {
    ProbeTrainConfig cfg;
    const Tensor x = Tensor::matrix(20, 3);
    try {
      train_probe(x, std::vector<int>(20, 1), 2, cfg);
      FAIL("expected DegenerateLabels");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateLabels);
    }
    try {
      train_probe(Tensor::matrix(9, 3), std::vector<int>{0, 1, 0, 1, 0, 1, 0, 1, 0}, 2, cfg);
      FAIL("expected InsufficientSamples");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InsufficientSamples);
    }
    std::vector<int> bad(20, 0);
    bad[3] = 2;
    CHECK_THROWS_AS(train_probe(x, bad, 2, cfg), Error);
  }
}

TEST_CASE("layer_sweep ranks the informative layer first") {
  std::mt19937_64 gen(71);
  auto make = [&](bool informative) {
    Embeddings e;
    e.num_classes = 3;
    for (auto* part : {&e.train, &e.test}) {
      const std::size_t m = part == &e.train ? 300 : 90;
      part->x = oracle::random_matrix(gen, m, 8);
      part->labels.resize(m);
      for (std::size_t r = 0; r < m; ++r) {
        part->ids.push_back(std::to_string(r));
        part->labels[r] = static_cast<int>(r % 3);
        if (informative) part->x(r, part->labels[r]) += 3.0f;
      }
    }
    return e;
  };
  const Embeddings noise = make(false), signal = make(true);
  ProbeTrainConfig cfg;
  cfg.seed = 1;
  cfg.max_epochs = 60;
  const std::vector<LayerInput> layers{{"noise", &noise}, {"signal", &signal}};
  const LayerSweep sweep = layer_sweep(layers, cfg);
  REQUIRE(sweep.ranked.size() == 2);
  CHECK(sweep.ranked[0].name == "signal");
  CHECK(sweep.selected == 1);
  CHECK(sweep.ranked[0].test_accuracy > sweep.ranked[1].test_accuracy);
  CHECK(sweep.ranked[0].n_test == 90);

  const std::vector<LayerInput> one{{"only", &noise}};
  const LayerSweep single = layer_sweep(one, cfg);
  CHECK(single.ranked.size() == 1);
  CHECK(single.selected == 0);

  const std::vector<LayerInput> twins{{"a", &signal}, {"b", &signal}};
  CHECK(layer_sweep(twins, cfg).selected == 0);
  CHECK_THROWS_AS(layer_sweep(std::span<const LayerInput>{}, cfg), Error);
}
