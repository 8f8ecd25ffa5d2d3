#include "pathkg/trainer.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "pathkg/errors.hpp"
#include "pathkg/parallel.hpp"
#include "pathkg/rng.hpp"
#include "pathkg/text.hpp"

namespace pathkg {

void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (cfg.batch == 0) throw ConfigError("batch must be > 0");
  if (cfg.epochs == 0) throw ConfigError("epochs must be > 0");
  if (!(cfg.lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (cfg.patience == 0) throw ConfigError("patience must be > 0");
  if (!(cfg.min_delta >= 0.0)) throw ConfigError("min_delta must be >= 0");
}

AdamState adam_init(const ModelParams& params) {
  return {params.zeros_like(), params.zeros_like(), 0};
}

void adam_update(ModelParams& params, const ModelParams& grads, AdamState& state,
                 const TrainConfig& cfg) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);

  std::vector<const Matrix*> g;
  std::vector<Matrix*> m1;
  std::vector<Matrix*> m2;
  grads.for_each([&](std::string_view, const Matrix& x) { g.push_back(&x); });
  state.first.for_each([&](std::string_view, Matrix& x) { m1.push_back(&x); });
  state.second.for_each([&](std::string_view, Matrix& x) { m2.push_back(&x); });
  std::size_t k = 0;
  params.for_each([&](std::string_view, Matrix& p) {
    auto& m = *m1[k];
    auto& v = *m2[k];
    const auto& grad = *g[k];
    ++k;
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    p.array() -= cfg.learning_rate * (m.array() / c1) /
                 ((v.array() / c2).sqrt() + cfg.epsilon);
  });
}

double accuracy(std::span<const InstanceFeatures> instances, const ModelParams& params,
                const FeatureContext& ctx, unsigned workers) {
  if (instances.empty()) return 0.0;
  std::vector<char> correct(instances.size(), 0);
  parallel_for(instances.size(), workers, [&](std::size_t i) {
    const auto tr = score_pair(instances[i], params, ctx);
    const bool predicted = tr.probability > 0.5;
    correct[i] = predicted == (instances[i].label == Label::positive);
  });
  const auto hits = std::accumulate(correct.begin(), correct.end(), std::size_t{0});
  return static_cast<double>(hits) / static_cast<double>(instances.size());
}

double mean_loss(std::span<const InstanceFeatures> instances, const ModelParams& params,
                 const FeatureContext& ctx, unsigned workers) {
  if (instances.empty()) return 0.0;
  std::vector<double> nll(instances.size(), 0.0);
  parallel_for(instances.size(), workers, [&](std::size_t i) {
    nll[i] = instance_nll(score_pair(instances[i], params, ctx));
  });
  const double total = std::accumulate(nll.begin(), nll.end(), 0.0) +
                       l2_penalty(params, instances, ctx);
  return total / static_cast<double>(instances.size());
}

TrainResult train(const ModelParams& initial, std::span<const InstanceFeatures> train_set,
                  std::span<const InstanceFeatures> dev_set, const FeatureContext& ctx,
                  const TrainConfig& cfg) {
  validate(cfg);
  std::vector<InstanceFeatures> data;
  for (const auto& inst : train_set) {
    if (!inst.paths.empty()) data.push_back(inst);
  }
  if (data.empty()) throw ConfigError("training set has no instance with paths");

  ModelParams params = initial;
  params.hp.lambda = cfg.lambda;
  auto adam = adam_init(params);

  TrainResult result;
  result.best = params;
  result.initial_loss = mean_loss(data, params, ctx, cfg.workers);

  std::vector<std::size_t> order(data.size());
  std::vector<InstanceFeatures> batch;
  double reference = -1.0;
  std::uint32_t last_improvement = 0;
  bool have_best = false;

  for (std::uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(cfg.seed, 0x65706f6368ULL, epoch));
    shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const auto end = std::min(order.size(), start + cfg.batch);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
      const auto g = grad_batch(batch, params, ctx, cfg.workers);
      epoch_loss += g.loss;
      adam_update(params, g.grad, adam, cfg);
    }

    EpochLog row{epoch, epoch_loss / static_cast<double>(data.size()), 0.0};
    if (!dev_set.empty()) row.dev_accuracy = accuracy(dev_set, params, ctx, cfg.workers);
    result.log.push_back(row);

    if (!have_best || row.dev_accuracy > result.best_dev_accuracy) {
      result.best = params;
      result.best_epoch = epoch;
      result.best_dev_accuracy = row.dev_accuracy;
      have_best = true;
    }
    if (dev_set.empty()) {
      // Without a dev set the final epoch is kept.
      result.best = params;
      result.best_epoch = epoch;
      continue;
    }
    if (reference < 0.0 || row.dev_accuracy >= reference + cfg.min_delta) {
      reference = row.dev_accuracy;
      last_improvement = epoch;
    } else if (epoch - last_improvement >= cfg.patience) {
      break;
    }
  }
  return result;
}

void write_train_log(std::ostream& out, const std::vector<EpochLog>& log) {
  out << "epoch\tloss\tdev_accuracy\n";
  for (const auto& row : log) {
    out << row.epoch << '\t' << text::format_double(row.loss) << '\t'
        << text::format_double(row.dev_accuracy) << '\n';
  }
}

GridSpec GridSpec::default_grid() {
  return {{1e-4, 1e-3, 2e-3, 2.5e-3, 3e-3},
          {50, 100, 150, 200, 250, 300},
          {50, 100, 150, 200, 250, 300}};
}

GridResult grid_search(const GridSpec& grid, const TrainConfig& base,
                       const HyperParams& base_hyper, const CellTrainer& run_cell) {
  if (grid.learning_rates.empty() || grid.dims.empty() || grid.type_dims.empty()) {
    throw ConfigError("every grid axis needs at least one value");
  }
  GridResult result;
  bool have_best = false;
  for (const double lr : grid.learning_rates) {
    for (const auto d : grid.dims) {
      for (const auto m : grid.type_dims) {
        GridCell cell{base, base_hyper, 0.0, 0};
        cell.train.learning_rate = lr;
        cell.hyper.d = d;
        cell.hyper.m = m;
        const auto trained = run_cell(cell.train, cell.hyper);
        cell.dev_accuracy = trained.best_dev_accuracy;
        cell.best_epoch = trained.best_epoch;
        result.cells.push_back(cell);
        if (!have_best || cell.dev_accuracy > result.best.dev_accuracy) {
          result.best = cell;
          have_best = true;
        }
      }
    }
  }
  return result;
}

}  // namespace pathkg
