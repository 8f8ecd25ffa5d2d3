#include "pathkg/sampler.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

#include "pathkg/errors.hpp"
#include "pathkg/rng.hpp"
#include "pathkg/text.hpp"

namespace pathkg {

void validate(const WalkConfig& cfg) {
  if (cfg.max_len < 1) throw ConfigError("walk max_len must be >= 1");
  if (cfg.walks_per_pair < 1) throw ConfigError("walks_per_pair must be >= 1");
}

namespace {

struct HiddenEdges {
  bool active = false;
  EntityId source{};
  EntityId target{};
  RelationId forward{};
  std::optional<RelationId> backward;

  bool blocks(EntityId from, const Edge& e) const {
    if (!active) return false;
    if (from == source && e.target == target && e.relation == forward) return true;
    return backward && from == target && e.target == source && e.relation == *backward;
  }
};

HiddenEdges hidden_edges(const KnowledgeGraph& kg, EntityId source, EntityId target,
                         std::optional<RelationId> relation, bool exclude) {
  HiddenEdges h;
  if (!exclude || !relation) return h;
  h.active = true;
  h.source = source;
  h.target = target;
  h.forward = *relation;
  h.backward = kg.inverse(*relation);
  return h;
}

void sort_paths(std::vector<Path>& paths, bool dedupe) {
  std::sort(paths.begin(), paths.end());
  if (dedupe) paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
}

}  // namespace

std::vector<Path> sample_paths(const KnowledgeGraph& kg, EntityId source,
                               EntityId target, const WalkConfig& cfg,
                               std::optional<RelationId> hidden_relation) {
  validate(cfg);
  const auto hidden =
      hidden_edges(kg, source, target, hidden_relation, cfg.exclude_direct);
  Rng rng(derive_seed(cfg.seed, index(source), index(target)));

  std::vector<Path> harvested;
  std::vector<Edge> allowed;
  for (std::uint32_t walk = 0; walk < cfg.walks_per_pair; ++walk) {
    Path path;
    path.entities.push_back(source);
    EntityId current = source;
    for (std::uint32_t step = 1; step <= cfg.max_len; ++step) {
      auto edges = kg.out_edges(current);
      if (hidden.active && (current == hidden.source || current == hidden.target)) {
        allowed.clear();
        for (const auto& e : edges) {
          if (!hidden.blocks(current, e)) allowed.push_back(e);
        }
        edges = allowed;
      }
      if (edges.empty()) break;
      const auto& edge = edges[uniform_index(rng, edges.size())];
      path.relations.push_back(edge.relation);
      path.entities.push_back(edge.target);
      current = edge.target;
      if (current == target) {
        harvested.push_back(std::move(path));
        break;
      }
    }
  }
  sort_paths(harvested, cfg.dedupe);
  return harvested;
}

namespace {

void enumerate_from(const KnowledgeGraph& kg, EntityId target, std::uint32_t max_len,
                    const HiddenEdges& hidden, Path& prefix, std::vector<Path>& out) {
  const EntityId current = prefix.entities.back();
  if (prefix.hops() > 0 && current == target) {
    out.push_back(prefix);
    return;
  }
  if (prefix.hops() == max_len) return;
  for (const auto& e : kg.out_edges(current)) {
    if (hidden.blocks(current, e)) continue;
    prefix.relations.push_back(e.relation);
    prefix.entities.push_back(e.target);
    enumerate_from(kg, target, max_len, hidden, prefix, out);
    prefix.relations.pop_back();
    prefix.entities.pop_back();
  }
}

}  // namespace

std::vector<Path> enumerate_paths(const KnowledgeGraph& kg, EntityId source,
                                  EntityId target, std::uint32_t max_len,
                                  std::optional<RelationId> hidden_relation) {
  const auto hidden = hidden_edges(kg, source, target, hidden_relation, true);
  std::vector<Path> out;
  Path prefix;
  prefix.entities.push_back(source);
  enumerate_from(kg, target, max_len, hidden, prefix, out);
  sort_paths(out, true);
  return out;
}

std::vector<Path> cap_paths(std::vector<Path> sorted_paths, std::size_t cap) {
  if (sorted_paths.size() > cap) sorted_paths.resize(cap);
  return sorted_paths;
}

void write_path_file(std::ostream& out, const KnowledgeGraph& kg,
                     const std::vector<PairPaths>& records) {
  for (const auto& r : records) {
    out << kg.entity_key(r.source) << '\t' << kg.entity_key(r.target) << '\t'
        << serialize_paths(r.paths, kg) << '\n';
  }
}

std::vector<PairPaths> read_path_file(std::istream& in, const KnowledgeGraph& kg) {
  std::vector<PairPaths> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = text::strip_cr(line);
    if (content.empty()) continue;
    const auto fields = text::split(content, '\t');
    if (fields.size() != 3) throw ParseError("paths", line_no, "expected 3 fields");
    const auto s = kg.find_entity(fields[0]);
    const auto t = kg.find_entity(fields[1]);
    if (!s || !t) throw ParseError("paths", line_no, "unknown entity");
    try {
      records.push_back({*s, *t, parse_paths(fields[2], kg)});
    } catch (const FormatError& e) {
      throw ParseError("paths", line_no, e.what());
    }
  }
  return records;
}

}  // namespace pathkg
