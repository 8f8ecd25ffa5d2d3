#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pathkg/embedding.hpp"
#include "pathkg/graph.hpp"
#include "pathkg/verbalizer.hpp"

namespace pathkg {

// Seeded benchmark graph: relation `rel0` holds for (a, b) exactly when some
// x != a, b has a -rel1-> x -rel2-> b. Every other relation is random.
struct SynthConfig {
  std::uint32_t entities = 2000;
  std::uint32_t relations = 10;
  std::uint32_t planted = 1000;     // rel1/rel2 chains
  std::uint32_t background = 4000;  // random triples over rel1 .. rel{R-1}
  std::uint32_t types = 6;
  std::uint64_t seed = 0;
};

void validate(const SynthConfig& cfg);

struct SynthKg {
  KnowledgeGraph graph;  // base relations only
  TemplateSet templates;
  RelationId target{};
  RelationId first_hop{};
  RelationId second_hop{};
};

SynthKg make_synth_kg(const SynthConfig& cfg);

// Writes triples.tsv, meta.tsv and templates.tsv into `dir`.
void write_synth_kg(const SynthKg& synth, const std::string& dir);

// A store holding hash_encode vectors for `statements`.
TextEmbeddingStore hashed_store(std::span<const Statement> statements, std::uint32_t dim,
                                std::uint64_t seed);

}  // namespace pathkg
