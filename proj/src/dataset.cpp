#include "pathkg/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "pathkg/errors.hpp"
#include "pathkg/parallel.hpp"
#include "pathkg/text.hpp"

namespace pathkg {

void validate(const SamplingConfig& cfg) {
  if (!(cfg.same_relation_prob >= 0.0 && cfg.same_relation_prob <= 1.0)) {
    throw ConfigError("same_relation_prob must lie in [0, 1]");
  }
  if (!(cfg.neg_per_pos_train > 0.0) || !(cfg.neg_per_pos_test > 0.0)) {
    throw ConfigError("negative ratios must be > 0");
  }
}

TripleSplit split_triples(std::span<const Triple> triples, std::uint64_t seed) {
  const std::size_t n = triples.size();
  if (n < 3) throw ConfigError("split needs at least 3 triples, got " + std::to_string(n));
  std::vector<Triple> shuffled(triples.begin(), triples.end());
  std::sort(shuffled.begin(), shuffled.end());
  Rng rng(derive_seed(seed, 0x73706c6974ULL));
  shuffle(shuffled.begin(), shuffled.end(), rng);

  const std::size_t train = 7 * n / 10;
  const std::size_t dev = 3 * n / 20;
  TripleSplit split;
  split.train.assign(shuffled.begin(), shuffled.begin() + train);
  split.dev.assign(shuffled.begin() + train, shuffled.begin() + train + dev);
  split.test.assign(shuffled.begin() + train + dev, shuffled.end());
  return split;
}

NegativeSampler::NegativeSampler(const KnowledgeGraph& kg, SamplingConfig cfg)
    : kg_(&kg), cfg_(cfg) {
  validate(cfg_);
  if (kg.entity_count() < 2 || kg.base_relation_count() < 2) {
    throw ConfigError("negative sampling needs at least 2 entities and 2 relations");
  }
  heads_by_relation_.resize(kg.base_relation_count());
  tails_by_relation_.resize(kg.base_relation_count());
  for (const auto& t : kg.triples()) {
    heads_by_relation_[index(t.relation)].push_back(t.head);
    tails_by_relation_[index(t.relation)].push_back(t.tail);
  }
  for (auto* pools : {&heads_by_relation_, &tails_by_relation_}) {
    for (auto& pool : *pools) {
      std::sort(pool.begin(), pool.end());
      pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    }
  }
}

std::optional<Triple> NegativeSampler::draw(const Triple& t, CorruptedSlot slot,
                                            bool same_pool, Rng& rng) const {
  const auto replace = [&](std::uint32_t candidate) {
    Triple out = t;
    switch (slot) {
      case CorruptedSlot::head: out.head = static_cast<EntityId>(candidate); break;
      case CorruptedSlot::tail: out.tail = static_cast<EntityId>(candidate); break;
      case CorruptedSlot::relation: out.relation = static_cast<RelationId>(candidate); break;
    }
    return out;
  };
  const auto valid = [&](const Triple& c) { return c != t && !kg_->contains(c); };

  // Candidate pool as ids; the full-entity and relation pools are implicit.
  const std::vector<EntityId>* pool = nullptr;
  std::size_t pool_size = 0;
  if (slot == CorruptedSlot::relation) {
    pool_size = kg_->base_relation_count();
  } else if (same_pool) {
    pool = slot == CorruptedSlot::head ? &heads_by_relation_[index(t.relation)]
                                       : &tails_by_relation_[index(t.relation)];
    pool_size = pool->size();
  } else {
    pool_size = kg_->entity_count();
  }
  if (pool_size == 0) return std::nullopt;
  const auto candidate_at = [&](std::size_t i) {
    return pool ? index((*pool)[i]) : static_cast<std::uint32_t>(i);
  };

  constexpr int kRejectionTries = 32;
  for (int attempt = 0; attempt < kRejectionTries; ++attempt) {
    const auto c = replace(candidate_at(uniform_index(rng, pool_size)));
    if (valid(c)) return c;
  }
  std::vector<std::uint32_t> remaining;
  for (std::size_t i = 0; i < pool_size; ++i) {
    if (valid(replace(candidate_at(i)))) remaining.push_back(candidate_at(i));
  }
  if (remaining.empty()) return std::nullopt;
  return replace(remaining[uniform_index(rng, remaining.size())]);
}

Corruption NegativeSampler::corrupt(const Triple& t, Rng& rng) const {
  static constexpr std::array kSlots = {CorruptedSlot::head, CorruptedSlot::tail,
                                        CorruptedSlot::relation};
  const auto first = uniform_index(rng, kSlots.size());
  const bool same_first = uniform_real(rng) < cfg_.same_relation_prob;
  for (std::size_t k = 0; k < kSlots.size(); ++k) {
    const auto slot = kSlots[(first + k) % kSlots.size()];
    if (slot == CorruptedSlot::relation) {
      if (auto c = draw(t, slot, false, rng)) return {*c, slot, false};
      continue;
    }
    for (const bool same : {same_first, !same_first}) {
      if (auto c = draw(t, slot, same, rng)) return {*c, slot, same};
    }
  }
  throw SamplingError("no valid corruption exists for triple (" +
                      kg_->entity_key(t.head) + ", " + kg_->relation_name(t.relation) +
                      ", " + kg_->entity_key(t.tail) + ")");
}

Triple corrupt_triple(const Triple& t, const KnowledgeGraph& kg,
                      const SamplingConfig& cfg, Rng& rng) {
  return NegativeSampler(kg, cfg).corrupt(t, rng).triple;
}

std::size_t negatives_for(std::size_t i, double ratio) {
  const auto upto = [ratio](std::size_t k) {
    return std::llround(static_cast<double>(k) * ratio);
  };
  return static_cast<std::size_t>(upto(i + 1) - upto(i));
}

std::vector<QueryInstance> build_instances(const KnowledgeGraph& full_graph,
                                           const KnowledgeGraph& path_graph,
                                           std::span<const Triple> split,
                                           SplitKind kind, const WalkConfig& walk,
                                           const SamplingConfig& cfg,
                                           unsigned workers) {
  validate(walk);
  const NegativeSampler sampler(full_graph, cfg);
  const double ratio =
      kind == SplitKind::train ? cfg.neg_per_pos_train : cfg.neg_per_pos_test;

  std::vector<std::vector<QueryInstance>> groups(split.size());
  parallel_for(split.size(), workers, [&](std::size_t i) {
    const Triple& pos = split[i];
    if (full_graph.is_inverse(pos.relation)) {
      throw ConfigError("query relations must be base relations");
    }
    Rng rng(derive_seed(cfg.seed, index(pos.head), index(pos.relation), index(pos.tail),
                        static_cast<std::uint64_t>(kind)));
    auto& group = groups[i];
    const auto add = [&](const Triple& t, Label label) {
      QueryInstance inst{t.head, t.tail, t.relation, label, {}};
      inst.paths = cap_paths(sample_paths(path_graph, t.head, t.tail, walk, t.relation),
                             walk.path_cap);
      if (kind == SplitKind::train && inst.paths.empty()) return;
      group.push_back(std::move(inst));
    };
    add(pos, Label::positive);
    const auto n_neg = negatives_for(i, ratio);
    for (std::size_t k = 0; k < n_neg; ++k) add(sampler.corrupt(pos, rng).triple, Label::negative);
  });

  std::vector<QueryInstance> out;
  for (auto& g : groups) {
    for (auto& inst : g) out.push_back(std::move(inst));
  }
  return out;
}

Dataset build_dataset(const KnowledgeGraph& kg, std::span<const RelationId> query_relations,
                      const WalkConfig& walk, const SamplingConfig& cfg, unsigned workers) {
  validate(walk);
  validate(cfg);
  if (kg.has_inverses()) throw ConfigError("build_dataset expects a graph without inverses");
  std::vector<bool> is_query(kg.base_relation_count(), query_relations.empty());
  for (const auto r : query_relations) {
    if (index(r) >= kg.base_relation_count()) throw ConfigError("unknown query relation");
    is_query[index(r)] = true;
  }
  std::vector<Triple> candidates;
  std::vector<Triple> kept;
  for (const auto& t : kg.triples()) {
    (is_query[index(t.relation)] ? candidates : kept).push_back(t);
  }
  auto split = split_triples(candidates, cfg.seed);
  kept.insert(kept.end(), split.train.begin(), split.train.end());

  Dataset out{with_inverses(kg.with_triples(std::move(kept))), std::move(split), {}, {}, {}};
  out.train = build_instances(kg, out.path_graph, out.split.train, SplitKind::train, walk,
                              cfg, workers);
  out.dev = build_instances(kg, out.path_graph, out.split.dev, SplitKind::dev, walk, cfg,
                            workers);
  out.test = build_instances(kg, out.path_graph, out.split.test, SplitKind::test, walk, cfg,
                             workers);
  return out;
}

std::string serialize_instance(const QueryInstance& inst, const KnowledgeGraph& kg) {
  std::string out = inst.label == Label::positive ? "1" : "0";
  out += '\t';
  out += kg.relation_name(inst.relation);
  out += '\t';
  out += kg.entity_key(inst.head);
  out += '\t';
  out += kg.entity_key(inst.tail);
  out += '\t';
  out += serialize_paths(inst.paths, kg);
  return out;
}

void write_instances(std::ostream& out, const KnowledgeGraph& kg,
                     std::span<const QueryInstance> instances) {
  for (const auto& inst : instances) out << serialize_instance(inst, kg) << '\n';
}

std::vector<QueryInstance> read_instances(std::istream& in, const KnowledgeGraph& kg,
                                          const std::string& source) {
  std::vector<QueryInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = text::strip_cr(line);
    if (content.empty()) continue;
    const auto f = text::split(content, '\t');
    if (f.size() != 5) {
      throw ParseError(source, line_no,
                       "expected 5 tab-separated fields, got " + std::to_string(f.size()));
    }
    QueryInstance inst;
    if (f[0] == "1") {
      inst.label = Label::positive;
    } else if (f[0] == "0") {
      inst.label = Label::negative;
    } else {
      throw ParseError(source, line_no, "label must be 1 or 0");
    }
    const auto rel = kg.find_relation(f[1]);
    const auto head = kg.find_entity(f[2]);
    const auto tail = kg.find_entity(f[3]);
    if (!rel || kg.is_inverse(*rel)) throw ParseError(source, line_no, "unknown query relation");
    if (!head || !tail) throw ParseError(source, line_no, "unknown entity");
    inst.relation = *rel;
    inst.head = *head;
    inst.tail = *tail;
    try {
      inst.paths = parse_paths(f[4], kg);
    } catch (const FormatError& e) {
      throw ParseError(source, line_no, e.what());
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<QueryInstance> read_instance_file(const std::string& path,
                                              const KnowledgeGraph& kg) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_instances(in, kg, path);
}

}  // namespace pathkg
