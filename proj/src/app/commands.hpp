#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "common.hpp"
#include "saekit/app.hpp"
#include "saekit/disentangle.hpp"

namespace saekit::app {

struct TrainFlags {
  double lr = 1e-3;
  std::size_t batch = 32;
  double val_frac = 0.2;
  std::size_t latent = 2048;
  std::size_t epochs = 100;
  std::size_t patience = 20;
  std::size_t probe_epochs = 200;
  std::size_t probe_patience = 30;

  SaeTrainConfig sae(double sparsity, std::uint64_t seed) const;
  ProbeTrainConfig probe(std::uint64_t seed) const;
  json sae_json() const;
  json probe_json() const;
};

struct DisentangleFlags {
  std::optional<std::string> factors;
  std::optional<std::string> family_map;
  std::string lam = "0.01*lmax";
  double eval_frac = 0.2;
  bool in_sample = false;
  std::size_t knn_k = 3;

  DisentangleConfig config(std::uint64_t seed) const;
  json to_json() const;
};

struct ProbeOptions {
  std::vector<std::string> manifests;
  std::vector<std::string> layers;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  TrainFlags train;
};

struct SaeTrainOptions {
  std::string manifest;
  std::string out;
  std::uint64_t seed = 0;
  double sparsity = 0.95;
  TrainFlags train;
};

struct SaeEvalOptions {
  std::string checkpoint;
  std::string manifest;
  std::optional<std::string> out;
  bool write_codes = false;
};

struct SweepOptions {
  std::vector<std::string> manifests;
  std::vector<std::string> layers;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string sparsities = "0.75,0.8,0.85,0.9,0.95,0.99";
  bool baseline = true;
  TrainFlags train;
  DisentangleFlags disentangle;
};

struct DisentangleOptions {
  std::optional<std::string> manifest;
  std::optional<std::string> checkpoint;
  std::optional<std::string> codes;
  std::optional<std::string> ids;
  std::string layer;
  std::optional<std::string> run_id;
  std::string out;
  std::uint64_t seed = 0;
  DisentangleFlags flags;
};

struct ReportOptions {
  std::string runs;
  std::optional<std::string> out;
};

int cmd_probe(const ProbeOptions& o, std::ostream& out, Log& log);
int cmd_sae_train(const SaeTrainOptions& o, std::ostream& out, Log& log);
int cmd_sae_eval(const SaeEvalOptions& o, std::ostream& out, Log& log);
int cmd_sweep(const SweepOptions& o, std::ostream& out, Log& log);
int cmd_disentangle(const DisentangleOptions& o, std::ostream& out, Log& log);
int cmd_report(const ReportOptions& o, std::ostream& out, Log& log);

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F&& fn);

// Shared by disentangle and sweep: runs the pipeline and writes
// disentangle.json and importance.atns into dir.
DisentangleReport write_disentanglement(const fs::path& dir, const Tensor& codes, const std::vector<std::string>& ids,
                                        const DisentangleFlags& flags, std::uint64_t seed, const std::string& run_id,
                                        const std::string& layer, std::optional<double> sparsity, Log& log);

}  // namespace saekit::app

#include <atomic>
#include <exception>
#include <thread>

namespace saekit::app {

template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace saekit::app
