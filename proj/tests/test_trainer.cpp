#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "fixtures.hpp"
#include "pathkg/errors.hpp"
#include "pathkg/trainer.hpp"

using namespace pathkg;

namespace {

ModelParams scalar(double x) {
  ModelParams p;
  p.kind = ModelKind::path_text;
  p.bias = Matrix::Constant(1, 1, x);
  return p;
}

struct Setup {
  fixtures::ModelFixture f;
  TextEmbeddingStore store{6};
  std::unique_ptr<FeatureContext> ctx;
  std::vector<InstanceFeatures> train, dev;

  Setup(std::uint64_t seed, ModelKind kind) : f(fixtures::model_fixture(seed, 60, 3, 3)) {
    ctx = std::make_unique<FeatureContext>(f.kg, &f.templates, store, LookupMode::synthetic(seed),
                                           f.instances, kind);
    for (std::size_t i = 0; i < f.instances.size(); ++i) {
      (i % 4 == 0 ? dev : train).push_back(ctx->features(f.instances[i]));
    }
  }
};

HyperParams small() {
  HyperParams hp;
  hp.d = 6;
  hp.m = 3;
  hp.H = 6;
  return hp;
}

}  // namespace

TEST_CASE("Adam first step moves by the learning rate against the gradient sign") {
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  for (const double g : {3.0, -0.25, 1e-3}) {
    auto p = scalar(1.0);
    auto state = adam_init(p);
    adam_update(p, scalar(g), state, cfg);
    CHECK(p.bias(0, 0) == doctest::Approx(1.0 - 0.01 * (g > 0 ? 1 : -1)).epsilon(1e-6));
  }
  auto p = scalar(1.0);
  auto state = adam_init(p);
  adam_update(p, scalar(0.0), state, cfg);
  CHECK(p.bias(0, 0) == 1.0);
  CHECK(state.step == 1);
}

TEST_CASE("two Adam steps on a quadratic match the closed form") {
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  // f(x) = (x - 3)^2, f'(x) = 2 (x - 3), starting from x = 0.
  double x = 0.0, m = 0.0, v = 0.0;
  auto p = scalar(x);
  auto state = adam_init(p);
  for (int t = 1; t <= 2; ++t) {
    const double g = 2.0 * (x - 3.0);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    x -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
    adam_update(p, scalar(2.0 * (p.bias(0, 0) - 3.0)), state, cfg);
    CHECK(std::abs(p.bias(0, 0) - x) < 1e-12);
  }
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = {};
  cfg.beta2 = 1.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = {};
  cfg.batch = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("flat dev accuracy stops exactly patience epochs after the best") {
  Setup s(3, ModelKind::entity_text_rnn);
  const auto init = init_params(ModelKind::entity_text_rnn, small(), s.f.kg, 1);
  TrainConfig cfg;
  cfg.learning_rate = 1e-12;
  cfg.epochs = 100;
  cfg.batch = 16;
  const auto r = train(init, s.train, s.dev, *s.ctx, cfg);
  CHECK(r.best_epoch == 1);
  CHECK(r.log.size() == 1 + cfg.patience);
  for (const auto& row : r.log) CHECK(row.dev_accuracy == r.log[0].dev_accuracy);
}

TEST_CASE("a training set without paths is rejected") {
  Setup s(3, ModelKind::entity_text_rnn);
  auto empty = s.train;
  for (auto& inst : empty) inst.paths.clear();
  const auto init = init_params(ModelKind::entity_text_rnn, small(), s.f.kg, 1);
  CHECK_THROWS_AS(train(init, empty, s.dev, *s.ctx, TrainConfig{}), ConfigError);
}

TEST_CASE("one epoch lowers the training objective") {
  std::vector<double> gains;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Setup s(seed, ModelKind::entity_text_rnn);
    const auto init = init_params(ModelKind::entity_text_rnn, small(), s.f.kg, seed);
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.epochs = 1;
    cfg.batch = 8;
    cfg.seed = seed;
    const auto r = train(init, s.train, {}, *s.ctx, cfg);
    gains.push_back(r.initial_loss - mean_loss(s.train, r.best, *s.ctx));
  }
  std::sort(gains.begin(), gains.end());
  CHECK(gains[2] > 0.0);
}

TEST_CASE("training is reproducible bit for bit") {
  for (const auto kind : {ModelKind::entity_text_rnn, ModelKind::path_text}) {
    Setup s(7, kind);
    auto hp = small();
    const auto init = init_params(kind, hp, s.f.kg, 2);
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.epochs = 5;
    cfg.batch = 8;
    cfg.seed = 4;
    const auto a = train(init, s.train, s.dev, *s.ctx, cfg);
    cfg.workers = 3;
    const auto b = train(init, s.train, s.dev, *s.ctx, cfg);
    std::ostringstream la, lb, ca, cb;
    write_train_log(la, a.log);
    write_train_log(lb, b.log);
    CHECK(la.str() == lb.str());
    CHECK(la.str().rfind("epoch\tloss\tdev_accuracy\n", 0) == 0);
    const auto info = checkpoint_info(s.f.kg, 0);
    write_checkpoint(ca, a.best, info);
    write_checkpoint(cb, b.best, info);
    CHECK(ca.str() == cb.str());
  }
}

TEST_CASE("grid search") {
  const TrainConfig base;
  const HyperParams hyper;
  GridSpec one{{1e-3}, {50}, {50}};
  int calls = 0;
  const auto r1 = grid_search(one, base, hyper, [&](const TrainConfig& c, const HyperParams& h) {
    ++calls;
    CHECK(c.learning_rate == 1e-3);
    CHECK(h.d == 50);
    TrainResult r;
    r.best_dev_accuracy = 0.25;
    r.best_epoch = 3;
    return r;
  });
  CHECK(calls == 1);
  CHECK(r1.best.dev_accuracy == 0.25);
  CHECK(r1.best.best_epoch == 3);

  // A cell whose model never learns loses to one that does; ties go to the
  // earlier cell.
  GridSpec two{{1e-4, 1e-3}, {50, 100}, {50}};
  std::vector<std::pair<double, std::uint32_t>> order;
  const auto r2 = grid_search(two, base, hyper, [&](const TrainConfig& c, const HyperParams& h) {
    order.emplace_back(c.learning_rate, h.d);
    TrainResult r;
    r.best_dev_accuracy = c.learning_rate == 1e-3 ? 0.9 : 0.5;
    return r;
  });
  REQUIRE(order.size() == 4);
  CHECK(order[0] == std::pair<double, std::uint32_t>{1e-4, 50});
  CHECK(order[1] == std::pair<double, std::uint32_t>{1e-4, 100});
  CHECK(r2.best.train.learning_rate == 1e-3);
  CHECK(r2.best.hyper.d == 50);

  const auto full = GridSpec::default_grid();
  CHECK(full.learning_rates.size() * full.dims.size() * full.type_dims.size() == 180);
  CHECK_THROWS_AS(grid_search(GridSpec{}, base, hyper, nullptr), ConfigError);
}

TEST_CASE("grid winner replays to its logged dev accuracy") {
  Setup s(11, ModelKind::entity_text_rnn);
  TrainConfig base;
  base.epochs = 4;
  base.batch = 8;
  base.seed = 3;
  const auto runner = [&](const TrainConfig& c, const HyperParams& h) {
    return train(init_params(ModelKind::entity_text_rnn, h, s.f.kg, 5), s.train, s.dev, *s.ctx, c);
  };
  const auto g = grid_search(GridSpec{{1e-3, 1e-2}, {4, 6}, {3}}, base, small(), runner);
  const auto replay = runner(g.best.train, g.best.hyper);
  CHECK(replay.best_dev_accuracy == g.best.dev_accuracy);
  CHECK(accuracy(s.dev, replay.best, *s.ctx) == g.best.dev_accuracy);
}
