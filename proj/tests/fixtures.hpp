#pragma once

#include <algorithm>
#include <array>
#include <sstream>
#include <string>
#include <vector>

#include "pathkg/dataset.hpp"
#include "pathkg/embedding.hpp"
#include "pathkg/graph.hpp"
#include "pathkg/rng.hpp"
#include "pathkg/sampler.hpp"
#include "pathkg/verbalizer.hpp"

namespace fixtures {

inline std::string data_path(const std::string& rel) {
  return std::string(PATHKG_TEST_DATA) + "/" + rel;
}

inline pathkg::KnowledgeGraph figure1() {
  return pathkg::load_graph_files(data_path("figure1/triples.tsv"),
                                  data_path("figure1/meta.tsv"));
}

inline pathkg::TemplateSet figure1_templates(const pathkg::KnowledgeGraph& kg) {
  return pathkg::load_template_file(data_path("figure1/templates.tsv"), kg);
}

using Row = std::array<std::string, 3>;

inline pathkg::KnowledgeGraph graph_of(const std::vector<Row>& rows,
                                       const std::string& meta = "") {
  std::ostringstream t;
  for (const auto& r : rows) t << r[0] << '\t' << r[1] << '\t' << r[2] << '\n';
  std::istringstream tin(t.str());
  std::istringstream min(meta);
  return pathkg::load_graph(tin, meta.empty() ? nullptr : &min);
}

// Random multigraph with entities n0..n{nodes-1} and relations r0..r{rels-1}.
inline pathkg::KnowledgeGraph random_graph(std::uint32_t nodes, std::uint32_t edges,
                                           std::uint32_t rels, std::uint64_t seed,
                                           bool typed = false) {
  pathkg::Rng rng(seed);
  std::vector<Row> rows;
  for (std::uint32_t i = 0; i < edges; ++i) {
    const auto h = pathkg::uniform_index(rng, nodes);
    auto t = pathkg::uniform_index(rng, nodes);
    if (t == h) t = (t + 1) % nodes;
    rows.push_back({"n" + std::to_string(h), "r" + std::to_string(pathkg::uniform_index(rng, rels)),
                    "n" + std::to_string(t)});
  }
  std::string meta;
  if (typed) {
    for (std::uint32_t e = 0; e < nodes; ++e) {
      const auto k = pathkg::uniform_index(rng, 4);
      meta += "n" + std::to_string(e) + "\tnode" + std::to_string(e) + "\t";
      if (k == 1) meta += "t0";
      if (k == 2) meta += "t1";
      if (k == 3) meta += "t1,t2";
      meta += "\n";
    }
  }
  return graph_of(rows, meta);
}

inline pathkg::TemplateSet plain_templates(const pathkg::KnowledgeGraph& kg) {
  pathkg::TemplateSet set;
  for (std::uint32_t r = 0; r < kg.base_relation_count(); ++r) {
    const auto id = static_cast<pathkg::RelationId>(r);
    set.add(id, pathkg::RelationTemplate("{head} " + kg.relation_name(id) + " {tail}"));
  }
  return set;
}

// A typed random graph with inverses, matching templates and instances whose
// paths come from exhaustive enumeration.
struct ModelFixture {
  pathkg::KnowledgeGraph kg;
  pathkg::TemplateSet templates;
  std::vector<pathkg::QueryInstance> instances;
};

inline ModelFixture model_fixture(std::uint64_t seed, std::size_t count,
                                  std::size_t max_paths, std::uint32_t max_hops) {
  ModelFixture f;
  f.kg = pathkg::with_inverses(random_graph(20, 60, 3, seed, true));
  f.templates = plain_templates(f.kg);
  pathkg::Rng rng(pathkg::derive_seed(seed, 0x666978ULL));
  const auto n = f.kg.entity_count();
  for (int attempt = 0; f.instances.size() < count && attempt < 100000; ++attempt) {
    const auto s = static_cast<pathkg::EntityId>(pathkg::uniform_index(rng, n));
    const auto t = static_cast<pathkg::EntityId>(pathkg::uniform_index(rng, n));
    if (s == t) continue;
    auto paths = pathkg::enumerate_paths(f.kg, s, t, max_hops);
    if (paths.empty()) continue;
    // Keep a seeded subset so long paths show up too.
    pathkg::shuffle(paths.begin(), paths.end(), rng);
    paths.resize(std::min(paths.size(), max_paths));
    std::sort(paths.begin(), paths.end());
    const auto rel = static_cast<pathkg::RelationId>(
        pathkg::uniform_index(rng, f.kg.base_relation_count()));
    const auto label =
        pathkg::uniform_index(rng, 2) == 0 ? pathkg::Label::negative : pathkg::Label::positive;
    f.instances.push_back({s, t, rel, label, std::move(paths)});
  }
  return f;
}

}  // namespace fixtures
