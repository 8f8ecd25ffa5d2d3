#include "pathkg/synth.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "pathkg/errors.hpp"
#include "pathkg/rng.hpp"

namespace pathkg {

void validate(const SynthConfig& cfg) {
  if (cfg.entities < 4) throw ConfigError("synth-kg needs at least 4 entities");
  if (cfg.relations < 3) throw ConfigError("synth-kg needs at least 3 relations");
  if (cfg.planted == 0) throw ConfigError("synth-kg needs planted > 0");
}

namespace {

std::string padded(std::string_view prefix, std::uint32_t i, std::uint32_t n) {
  auto digits = std::to_string(n > 0 ? n - 1 : 0).size();
  auto s = std::to_string(i);
  return std::string(prefix) + std::string(digits - std::min(digits, s.size()), '0') + s;
}

}  // namespace

SynthKg make_synth_kg(const SynthConfig& cfg) {
  validate(cfg);
  const auto n = cfg.entities;
  Rng rng(derive_seed(cfg.seed, 0x73796e7468ULL));

  SymbolTable entities;
  for (std::uint32_t e = 0; e < n; ++e) entities.intern(padded("e", e, n));
  SymbolTable relations;
  for (std::uint32_t r = 0; r < cfg.relations; ++r) relations.intern("rel" + std::to_string(r));

  const auto pick = [&] { return static_cast<std::uint32_t>(uniform_index(rng, n)); };
  std::set<Triple> edges;
  const auto edge = [](std::uint32_t h, std::uint32_t r, std::uint32_t t) {
    return Triple{static_cast<EntityId>(h), static_cast<RelationId>(r), static_cast<EntityId>(t)};
  };

  for (std::uint32_t k = 0; k < cfg.planted; ++k) {
    std::uint32_t a = pick();
    std::uint32_t x = pick();
    std::uint32_t b = pick();
    while (x == a) x = pick();
    while (b == a || b == x) b = pick();
    edges.insert(edge(a, 1, x));
    edges.insert(edge(x, 2, b));
  }
  const auto background_relations = cfg.relations - 1;
  for (std::uint32_t k = 0; k < cfg.background; ++k) {
    const auto r = 1 + static_cast<std::uint32_t>(uniform_index(rng, background_relations));
    const auto h = pick();
    auto t = pick();
    while (t == h) t = pick();
    edges.insert(edge(h, r, t));
  }

  // rel0 is the closure of rel1 followed by rel2.
  std::vector<std::vector<std::uint32_t>> second(n);
  for (const auto& t : edges) {
    if (index(t.relation) == 2) second[index(t.head)].push_back(index(t.tail));
  }
  std::vector<Triple> triples(edges.begin(), edges.end());
  for (const auto& t : edges) {
    if (index(t.relation) != 1) continue;
    for (const auto b : second[index(t.tail)]) {
      if (b != index(t.head)) triples.push_back(edge(index(t.head), 0, b));
    }
  }

  std::vector<EntityMeta> metas(n);
  for (std::uint32_t e = 0; e < n; ++e) {
    auto& m = metas[e];
    m.name = entities.name(e);
    // Roughly one entity in ten stays untyped.
    if (cfg.types == 0 || uniform_index(rng, 10) == 0) continue;
    m.types.push_back("type" + std::to_string(uniform_index(rng, cfg.types)));
    if (uniform_index(rng, 3) == 0) {
      auto extra = "type" + std::to_string(uniform_index(rng, cfg.types));
      if (extra != m.types.front()) m.types.push_back(std::move(extra));
    }
    m.category = "thing";
  }

  SynthKg out{KnowledgeGraph::build(std::move(entities), std::move(relations),
                                    std::move(triples), std::move(metas), false),
              {},
              RelationId{0},
              RelationId{1},
              RelationId{2}};
  for (std::uint32_t r = 0; r < cfg.relations; ++r) {
    out.templates.add(static_cast<RelationId>(r),
                      RelationTemplate("{head} rel" + std::to_string(r) + " {tail}"));
  }
  return out;
}

void write_synth_kg(const SynthKg& synth, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  const auto open = [&](const std::string& name) {
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    if (!out) throw IoError("cannot write " + dir + "/" + name);
    return out;
  };
  auto triples = open("triples.tsv");
  write_triples(triples, synth.graph);
  auto meta = open("meta.tsv");
  write_meta(meta, synth.graph);
  auto templates = open("templates.tsv");
  write_templates(templates, synth.graph, synth.templates);
}

TextEmbeddingStore hashed_store(std::span<const Statement> statements, std::uint32_t dim,
                                std::uint64_t seed) {
  TextEmbeddingStore store(dim);
  for (const auto& s : statements) store.add(s.key, hash_encode(s.text, dim, seed));
  return store;
}

}  // namespace pathkg
