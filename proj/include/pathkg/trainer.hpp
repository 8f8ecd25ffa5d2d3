#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "pathkg/model.hpp"

namespace pathkg {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch = 64;
  std::uint32_t epochs = 100;
  double lambda = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint32_t patience = 10;
  double min_delta = 0.01;  // absolute, on the [0, 1] accuracy scale
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

void validate(const TrainConfig& cfg);

struct AdamState {
  ModelParams first;
  ModelParams second;
  std::uint64_t step = 0;
};

AdamState adam_init(const ModelParams& params);

// One bias-corrected Adam step on every entry.
void adam_update(ModelParams& params, const ModelParams& grads, AdamState& state,
                 const TrainConfig& cfg);

struct EpochLog {
  std::uint32_t epoch = 0;
  double loss = 0.0;  // mean per-instance objective over the epoch's batches
  double dev_accuracy = 0.0;
};

struct TrainResult {
  ModelParams best;
  std::uint32_t best_epoch = 0;
  double best_dev_accuracy = 0.0;
  double initial_loss = 0.0;  // mean objective before the first update
  std::vector<EpochLog> log;
};

// Fraction of instances whose prediction (P > 0.5) matches the label.
double accuracy(std::span<const InstanceFeatures> instances, const ModelParams& params,
                const FeatureContext& ctx, unsigned workers = 1);

// Mean per-instance objective (NLL plus the L2 term over the whole set).
double mean_loss(std::span<const InstanceFeatures> instances, const ModelParams& params,
                 const FeatureContext& ctx, unsigned workers = 1);

// Mini-batch Adam with seed-deterministic epoch shuffles. Stops once dev
// accuracy has not improved by min_delta within `patience` epochs and returns
// the parameters of the best dev epoch (earliest on ties). Instances without
// paths are skipped; an empty remainder is an error.
TrainResult train(const ModelParams& initial, std::span<const InstanceFeatures> train_set,
                  std::span<const InstanceFeatures> dev_set, const FeatureContext& ctx,
                  const TrainConfig& cfg);

// `epoch<TAB>loss<TAB>dev_accuracy`.
void write_train_log(std::ostream& out, const std::vector<EpochLog>& log);

struct GridSpec {
  std::vector<double> learning_rates;
  std::vector<std::uint32_t> dims;       // d (= hidden width h)
  std::vector<std::uint32_t> type_dims;  // m

  static GridSpec default_grid();
};

struct GridCell {
  TrainConfig train;
  HyperParams hyper;
  double dev_accuracy = 0.0;
  std::uint32_t best_epoch = 0;
};

struct GridResult {
  GridCell best;
  std::vector<GridCell> cells;  // enumeration order
};

using CellTrainer = std::function<TrainResult(const TrainConfig&, const HyperParams&)>;

// Enumerates learning rate, then d, then m; every cell uses base.seed. The
// first cell with the maximal dev accuracy wins.
GridResult grid_search(const GridSpec& grid, const TrainConfig& base,
                       const HyperParams& base_hyper, const CellTrainer& run_cell);

}  // namespace pathkg
