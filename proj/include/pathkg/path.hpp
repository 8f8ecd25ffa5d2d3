#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pathkg/graph.hpp"

namespace pathkg {

// e0, r1, e1, ..., rL, eL stored as two parallel sequences
// (entities.size() == relations.size() + 1).
struct Path {
  std::vector<EntityId> entities;
  std::vector<RelationId> relations;

  std::size_t hops() const { return relations.size(); }
  EntityId source() const { return entities.front(); }
  EntityId target() const { return entities.back(); }

  bool operator==(const Path&) const = default;
};

// Total order: by hop count, then lexicographically over the interleaved id
// sequence e0, r1, e1, ...
bool operator<(const Path& a, const Path& b);

// True when every hop is an edge of `kg` and the path is non-empty.
bool is_valid_path(const Path& path, const KnowledgeGraph& kg);

// `e0|r1|e1|...|rL|eL` over entity keys and relation names.
std::string serialize_path(const Path& path, const KnowledgeGraph& kg);
Path parse_path(std::string_view text, const KnowledgeGraph& kg);

std::string serialize_paths(const std::vector<Path>& paths, const KnowledgeGraph& kg);
std::vector<Path> parse_paths(std::string_view text, const KnowledgeGraph& kg);

}  // namespace pathkg
