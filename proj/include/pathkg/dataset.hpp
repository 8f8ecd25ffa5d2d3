#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathkg/graph.hpp"
#include "pathkg/path.hpp"
#include "pathkg/rng.hpp"
#include "pathkg/sampler.hpp"

namespace pathkg {

enum class Label : std::uint8_t { negative = 0, positive = 1 };

struct QueryInstance {
  EntityId head{};
  EntityId tail{};
  RelationId relation{};  // query relation, never an inverse
  Label label = Label::negative;
  std::vector<Path> paths;  // sorted
};

struct SamplingConfig {
  double same_relation_prob = 0.70;
  double neg_per_pos_train = 0.75;
  double neg_per_pos_test = 8.0;
  std::uint64_t seed = 0;
};

void validate(const SamplingConfig& cfg);

struct TripleSplit {
  std::vector<Triple> train;
  std::vector<Triple> dev;
  std::vector<Triple> test;
};

// 7 : 1.5 : 1.5 with sizes floor(0.7n), floor(0.15n), remainder.
TripleSplit split_triples(std::span<const Triple> triples, std::uint64_t seed);

enum class CorruptedSlot : std::uint8_t { head, relation, tail };

struct Corruption {
  Triple triple;
  CorruptedSlot slot;
  bool same_relation_pool = false;  // entity slots only
};

// Corrupts exactly one slot of a true triple. Entity replacements come from
// the query relation's slot pool with probability same_relation_prob, else
// from all entities; relation replacements are uniform over other base
// relations. Only candidates that are not true triples of `kg` are drawn.
class NegativeSampler {
 public:
  NegativeSampler(const KnowledgeGraph& kg, SamplingConfig cfg);

  Corruption corrupt(const Triple& t, Rng& rng) const;

 private:
  std::optional<Triple> draw(const Triple& t, CorruptedSlot slot, bool same_pool,
                             Rng& rng) const;

  const KnowledgeGraph* kg_;
  SamplingConfig cfg_;
  std::vector<std::vector<EntityId>> heads_by_relation_;
  std::vector<std::vector<EntityId>> tails_by_relation_;
};

Triple corrupt_triple(const Triple& t, const KnowledgeGraph& kg,
                      const SamplingConfig& cfg, Rng& rng);

enum class SplitKind : std::uint8_t { train, dev, test };

// One positive per split triple plus its negatives, each with paths sampled
// on `path_graph` (which must not contain dev/test facts). `full_graph`
// defines truth for negative sampling. Training instances without paths are
// dropped; dev/test keep them.
std::vector<QueryInstance> build_instances(const KnowledgeGraph& full_graph,
                                           const KnowledgeGraph& path_graph,
                                           std::span<const Triple> split,
                                           SplitKind kind, const WalkConfig& walk,
                                           const SamplingConfig& cfg,
                                           unsigned workers = 1);

struct Dataset {
  KnowledgeGraph path_graph;  // train facts plus non-query facts, with inverses
  TripleSplit split;
  std::vector<QueryInstance> train;
  std::vector<QueryInstance> dev;
  std::vector<QueryInstance> test;
};

// Splits the triples of the query relations (all base relations when
// `query_relations` is empty), keeps every other triple in the path graph and
// builds the three instance sets. Dev uses the test negative ratio.
Dataset build_dataset(const KnowledgeGraph& kg, std::span<const RelationId> query_relations,
                      const WalkConfig& walk, const SamplingConfig& cfg,
                      unsigned workers = 1);

// Number of negatives attached to the i-th positive so that the first n
// positives carry round(n * ratio) negatives in total.
std::size_t negatives_for(std::size_t i, double ratio);

// `label<TAB>relation<TAB>head<TAB>tail<TAB>path;path;...` with label 1/0 and
// `-` for an empty path list.
std::string serialize_instance(const QueryInstance& inst, const KnowledgeGraph& kg);
void write_instances(std::ostream& out, const KnowledgeGraph& kg,
                     std::span<const QueryInstance> instances);
std::vector<QueryInstance> read_instances(std::istream& in, const KnowledgeGraph& kg,
                                          const std::string& source = "instances");
std::vector<QueryInstance> read_instance_file(const std::string& path,
                                              const KnowledgeGraph& kg);

}  // namespace pathkg
