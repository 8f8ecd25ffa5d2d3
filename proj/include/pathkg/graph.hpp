#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pathkg {

enum class EntityId : std::uint32_t {};
enum class RelationId : std::uint32_t {};

constexpr std::uint32_t index(EntityId id) { return static_cast<std::uint32_t>(id); }
constexpr std::uint32_t index(RelationId id) { return static_cast<std::uint32_t>(id); }

// Bidirectional string <-> dense index map. Interning is injective.
class SymbolTable {
 public:
  std::uint32_t intern(std::string_view name);
  std::optional<std::uint32_t> find(std::string_view name) const;
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;

  auto operator<=>(const Triple&) const = default;
};

struct EntityMeta {
  std::string name;  // display name; defaults to the entity key
  std::vector<std::string> types;
  std::optional<std::string> category;
  std::optional<std::string> description;
};

struct Edge {
  RelationId relation;
  EntityId target;

  auto operator<=>(const Edge&) const = default;
};

struct LoadDiagnostics {
  std::size_t triple_lines = 0;
  std::size_t meta_lines = 0;
  std::size_t duplicate_triples = 0;
};

inline constexpr std::string_view kInversePrefix = "inv:";

// Immutable interned triple store with a CSR adjacency index. When inverses
// are enabled, relation `r` (base id < R) has inverse id `R + r` named
// "inv:<name>", and every triple (h, r, t) also yields the edge (t, r^-1, h).
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  // `relations` holds base relations only. Triples are deduplicated; metas is
  // indexed by entity id and padded with name-only entries when short.
  static KnowledgeGraph build(SymbolTable entities, SymbolTable relations,
                              std::vector<Triple> triples,
                              std::vector<EntityMeta> metas, bool inverses,
                              LoadDiagnostics diagnostics = {});

  std::size_t entity_count() const { return entities_.size(); }
  // Includes inverse relations when enabled.
  std::size_t relation_count() const { return relations_.size(); }
  std::size_t base_relation_count() const { return base_relations_; }
  bool has_inverses() const { return inverses_; }

  bool is_inverse(RelationId r) const { return index(r) >= base_relations_; }
  std::optional<RelationId> inverse(RelationId r) const;
  RelationId base_relation(RelationId r) const;

  const std::string& entity_key(EntityId e) const { return entities_.name(index(e)); }
  // Display name used by statements; falls back to the key.
  const std::string& entity_name(EntityId e) const { return metas_.at(index(e)).name; }
  const std::string& relation_name(RelationId r) const { return relations_.name(index(r)); }
  std::optional<EntityId> find_entity(std::string_view key) const;
  std::optional<RelationId> find_relation(std::string_view name) const;

  // Base triples, sorted and unique.
  std::span<const Triple> triples() const { return triples_; }
  bool contains(const Triple& t) const;

  // Sorted by (relation, target).
  std::span<const Edge> out_edges(EntityId e) const;
  bool has_edge(EntityId from, RelationId r, EntityId to) const;

  const EntityMeta& meta(EntityId e) const { return metas_.at(index(e)); }
  const SymbolTable& type_vocabulary() const { return types_; }
  std::span<const std::uint32_t> entity_types(EntityId e) const;

  const SymbolTable& entities() const { return entities_; }
  const SymbolTable& relations() const { return relations_; }
  const LoadDiagnostics& diagnostics() const { return diagnostics_; }

  // Same vocabularies (ids stay valid), different triple set.
  KnowledgeGraph with_triples(std::vector<Triple> triples) const;

 private:
  SymbolTable entities_;
  SymbolTable relations_;
  std::size_t base_relations_ = 0;
  bool inverses_ = false;
  std::vector<Triple> triples_;
  std::vector<std::size_t> offsets_;
  std::vector<Edge> edges_;
  std::vector<EntityMeta> metas_;
  SymbolTable types_;
  std::vector<std::size_t> type_offsets_;
  std::vector<std::uint32_t> type_ids_;
  LoadDiagnostics diagnostics_;
};

// Triples: `head<TAB>relation<TAB>tail`. Meta:
// `entity<TAB>name<TAB>type,type,...[<TAB>category[<TAB>description]]`.
// `meta` may be null. Names may not be empty or contain '|', ';' (reserved by
// the path serialization); relation names may not start with "inv:".
KnowledgeGraph load_graph(std::istream& triples, std::istream* meta,
                          std::string_view triples_source = "triples",
                          std::string_view meta_source = "meta");

KnowledgeGraph load_graph_files(const std::string& triples_path,
                                const std::string& meta_path = {});

// Idempotent: a graph that already has inverses is returned unchanged.
KnowledgeGraph with_inverses(const KnowledgeGraph& kg);

void write_triples(std::ostream& out, const KnowledgeGraph& kg);
void write_meta(std::ostream& out, const KnowledgeGraph& kg);

}  // namespace pathkg
