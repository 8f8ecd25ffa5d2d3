#include <doctest.h>

#include "fixtures.hpp"
#include "gradcheck.hpp"

using namespace pathkg;

namespace {

void run(ModelKind kind, bool share_query, std::uint64_t seed) {
  const auto f = fixtures::model_fixture(seed, 6, 3, 3);
  const TextEmbeddingStore store(12);
  const FeatureContext ctx(f.kg, &f.templates, store, LookupMode::synthetic(seed), f.instances,
                           kind);
  HyperParams hp;
  hp.d = 8;
  hp.m = 4;
  hp.H = 12;
  hp.lambda = 1e-3;
  hp.share_query_embeddings = share_query;
  const auto p = init_params(kind, hp, f.kg, seed);
  std::vector<InstanceFeatures> batch;
  for (const auto& inst : f.instances) batch.push_back(ctx.features(inst));
  const auto r = gradcheck::check(batch, p, ctx);
  CHECK(r.checked > 100);
  CHECK(r.max_rel_error < 1e-4);
}

}  // namespace

TEST_CASE("model A gradient matches central differences") { run(ModelKind::entity_text_rnn, false, 1); }
TEST_CASE("model A gradient with shared query embeddings") { run(ModelKind::entity_text_rnn, true, 2); }
TEST_CASE("model B gradient matches central differences") { run(ModelKind::path_text, false, 3); }
