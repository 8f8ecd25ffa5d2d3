#include "pathkg/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "pathkg/errors.hpp"
#include "pathkg/text.hpp"

namespace pathkg {

std::uint32_t SymbolTable::intern(std::string_view name) {
  if (auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

std::optional<std::uint32_t> SymbolTable::find(std::string_view name) const {
  if (auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
  return std::nullopt;
}

KnowledgeGraph KnowledgeGraph::build(SymbolTable entities, SymbolTable relations,
                                     std::vector<Triple> triples,
                                     std::vector<EntityMeta> metas, bool inverses,
                                     LoadDiagnostics diagnostics) {
  KnowledgeGraph kg;
  kg.base_relations_ = relations.size();
  kg.inverses_ = inverses;
  kg.entities_ = std::move(entities);
  kg.relations_ = std::move(relations);
  if (inverses) {
    const auto base_names = kg.relations_.names();
    for (const auto& name : base_names) {
      kg.relations_.intern(std::string(kInversePrefix) + name);
    }
  }

  std::sort(triples.begin(), triples.end());
  const auto unique_end = std::unique(triples.begin(), triples.end());
  diagnostics.duplicate_triples +=
      static_cast<std::size_t>(std::distance(unique_end, triples.end()));
  triples.erase(unique_end, triples.end());
  kg.triples_ = std::move(triples);

  const std::size_t n = kg.entities_.size();
  std::vector<std::vector<Edge>> adjacency(n);
  for (const auto& t : kg.triples_) {
    adjacency[index(t.head)].push_back({t.relation, t.tail});
    if (inverses) {
      const auto inv = static_cast<RelationId>(index(t.relation) + kg.base_relations_);
      adjacency[index(t.tail)].push_back({inv, t.head});
    }
  }
  kg.offsets_.assign(n + 1, 0);
  for (std::size_t e = 0; e < n; ++e) {
    auto& edges = adjacency[e];
    std::sort(edges.begin(), edges.end());
    kg.offsets_[e + 1] = kg.offsets_[e] + edges.size();
    kg.edges_.insert(kg.edges_.end(), edges.begin(), edges.end());
  }

  metas.resize(n);
  kg.type_offsets_.assign(n + 1, 0);
  for (std::size_t e = 0; e < n; ++e) {
    auto& meta = metas[e];
    if (meta.name.empty()) meta.name = kg.entities_.name(static_cast<std::uint32_t>(e));
    for (const auto& type : meta.types) kg.type_ids_.push_back(kg.types_.intern(type));
    kg.type_offsets_[e + 1] = kg.type_ids_.size();
  }
  kg.metas_ = std::move(metas);
  kg.diagnostics_ = diagnostics;
  return kg;
}

std::optional<RelationId> KnowledgeGraph::inverse(RelationId r) const {
  if (!inverses_) return std::nullopt;
  const auto i = index(r);
  return static_cast<RelationId>(i < base_relations_ ? i + base_relations_
                                                     : i - base_relations_);
}

RelationId KnowledgeGraph::base_relation(RelationId r) const {
  const auto i = index(r);
  return static_cast<RelationId>(i < base_relations_ ? i : i - base_relations_);
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view key) const {
  if (auto id = entities_.find(key)) return static_cast<EntityId>(*id);
  return std::nullopt;
}

std::optional<RelationId> KnowledgeGraph::find_relation(std::string_view name) const {
  if (auto id = relations_.find(name)) return static_cast<RelationId>(*id);
  return std::nullopt;
}

bool KnowledgeGraph::contains(const Triple& t) const {
  return std::binary_search(triples_.begin(), triples_.end(), t);
}

std::span<const Edge> KnowledgeGraph::out_edges(EntityId e) const {
  const auto i = index(e);
  if (i + 1 >= offsets_.size()) return {};
  return {edges_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

bool KnowledgeGraph::has_edge(EntityId from, RelationId r, EntityId to) const {
  const auto edges = out_edges(from);
  return std::binary_search(edges.begin(), edges.end(), Edge{r, to});
}

std::span<const std::uint32_t> KnowledgeGraph::entity_types(EntityId e) const {
  const auto i = index(e);
  return {type_ids_.data() + type_offsets_[i], type_offsets_[i + 1] - type_offsets_[i]};
}

KnowledgeGraph KnowledgeGraph::with_triples(std::vector<Triple> triples) const {
  SymbolTable base;
  for (std::size_t r = 0; r < base_relations_; ++r) {
    base.intern(relations_.name(static_cast<std::uint32_t>(r)));
  }
  return build(entities_, std::move(base), std::move(triples), metas_, inverses_);
}

namespace {

void check_symbol(std::string_view value, std::string_view what,
                  const std::string& source, std::size_t line) {
  if (value.empty()) throw ParseError(source, line, "empty " + std::string(what));
  if (value.find_first_of("|;") != std::string_view::npos) {
    throw ParseError(source, line,
                     std::string(what) + " contains reserved character '|' or ';'");
  }
}

}  // namespace

KnowledgeGraph load_graph(std::istream& triples, std::istream* meta,
                          std::string_view triples_source,
                          std::string_view meta_source) {
  SymbolTable entities;
  SymbolTable relations;
  std::vector<Triple> parsed;
  LoadDiagnostics diagnostics;

  const std::string tsrc(triples_source);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(triples, line)) {
    ++line_no;
    const auto content = text::strip_cr(line);
    if (content.empty()) continue;
    const auto fields = text::split(content, '\t');
    if (fields.size() != 3) {
      throw ParseError(tsrc, line_no,
                       "expected 3 tab-separated fields, got " +
                           std::to_string(fields.size()));
    }
    check_symbol(fields[0], "head entity", tsrc, line_no);
    check_symbol(fields[1], "relation", tsrc, line_no);
    check_symbol(fields[2], "tail entity", tsrc, line_no);
    if (fields[1].starts_with(kInversePrefix)) {
      throw ParseError(tsrc, line_no, "relation names may not start with 'inv:'");
    }
    const auto head = entities.intern(fields[0]);
    const auto rel = relations.intern(fields[1]);
    const auto tail = entities.intern(fields[2]);
    parsed.push_back({static_cast<EntityId>(head), static_cast<RelationId>(rel),
                      static_cast<EntityId>(tail)});
    ++diagnostics.triple_lines;
  }

  std::vector<EntityMeta> metas(entities.size());
  std::vector<bool> seen(entities.size(), false);
  if (meta != nullptr) {
    const std::string msrc(meta_source);
    line_no = 0;
    while (std::getline(*meta, line)) {
      ++line_no;
      const auto content = text::strip_cr(line);
      if (content.empty()) continue;
      const auto fields = text::split(content, '\t');
      if (fields.size() < 3 || fields.size() > 5) {
        throw ParseError(msrc, line_no,
                         "expected 3 to 5 tab-separated fields, got " +
                             std::to_string(fields.size()));
      }
      check_symbol(fields[0], "entity", msrc, line_no);
      const auto id = entities.intern(fields[0]);
      if (id >= metas.size()) {
        metas.resize(id + 1);
        seen.resize(id + 1, false);
      }
      if (seen[id]) throw ParseError(msrc, line_no, "duplicate metadata for entity");
      seen[id] = true;
      EntityMeta m;
      m.name = std::string(text::trim(fields[1]));
      for (const auto type : text::split(fields[2], ',')) {
        const auto t = text::trim(type);
        if (t.empty()) continue;
        if (std::find(m.types.begin(), m.types.end(), t) == m.types.end()) {
          m.types.emplace_back(t);
        }
      }
      if (fields.size() > 3 && !text::trim(fields[3]).empty()) {
        m.category = std::string(text::trim(fields[3]));
      }
      if (fields.size() > 4 && !text::trim(fields[4]).empty()) {
        m.description = std::string(text::trim(fields[4]));
      }
      metas[id] = std::move(m);
      ++diagnostics.meta_lines;
    }
  }

  return KnowledgeGraph::build(std::move(entities), std::move(relations),
                               std::move(parsed), std::move(metas),
                               /*inverses=*/false, diagnostics);
}

KnowledgeGraph load_graph_files(const std::string& triples_path,
                                const std::string& meta_path) {
  std::ifstream triples(triples_path);
  if (!triples) throw IoError("cannot open " + triples_path);
  if (meta_path.empty()) return load_graph(triples, nullptr, triples_path);
  std::ifstream meta(meta_path);
  if (!meta) throw IoError("cannot open " + meta_path);
  return load_graph(triples, &meta, triples_path, meta_path);
}

KnowledgeGraph with_inverses(const KnowledgeGraph& kg) {
  if (kg.has_inverses()) return kg;
  SymbolTable base;
  for (const auto& name : kg.relations().names()) base.intern(name);
  std::vector<EntityMeta> metas;
  metas.reserve(kg.entity_count());
  for (std::uint32_t e = 0; e < kg.entity_count(); ++e) {
    metas.push_back(kg.meta(static_cast<EntityId>(e)));
  }
  return KnowledgeGraph::build(
      kg.entities(), std::move(base),
      std::vector<Triple>(kg.triples().begin(), kg.triples().end()), std::move(metas),
      /*inverses=*/true, kg.diagnostics());
}

void write_triples(std::ostream& out, const KnowledgeGraph& kg) {
  for (const auto& t : kg.triples()) {
    out << kg.entity_key(t.head) << '\t' << kg.relation_name(t.relation) << '\t'
        << kg.entity_key(t.tail) << '\n';
  }
}

void write_meta(std::ostream& out, const KnowledgeGraph& kg) {
  for (std::uint32_t e = 0; e < kg.entity_count(); ++e) {
    const auto id = static_cast<EntityId>(e);
    const auto& m = kg.meta(id);
    out << kg.entity_key(id) << '\t' << m.name << '\t';
    for (std::size_t i = 0; i < m.types.size(); ++i) {
      if (i > 0) out << ',';
      out << m.types[i];
    }
    if (m.category || m.description) out << '\t' << m.category.value_or("");
    if (m.description) out << '\t' << *m.description;
    out << '\n';
  }
}

}  // namespace pathkg
