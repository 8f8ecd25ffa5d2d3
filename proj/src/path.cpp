#include "pathkg/path.hpp"

#include <algorithm>

#include "pathkg/errors.hpp"
#include "pathkg/text.hpp"

namespace pathkg {

bool operator<(const Path& a, const Path& b) {
  if (a.hops() != b.hops()) return a.hops() < b.hops();
  for (std::size_t i = 0; i < a.hops(); ++i) {
    if (a.entities[i] != b.entities[i]) return a.entities[i] < b.entities[i];
    if (a.relations[i] != b.relations[i]) return a.relations[i] < b.relations[i];
  }
  return a.entities.back() < b.entities.back();
}

bool is_valid_path(const Path& path, const KnowledgeGraph& kg) {
  if (path.relations.empty() || path.entities.size() != path.relations.size() + 1) {
    return false;
  }
  for (std::size_t i = 0; i < path.hops(); ++i) {
    if (index(path.entities[i]) >= kg.entity_count() ||
        index(path.entities[i + 1]) >= kg.entity_count() ||
        index(path.relations[i]) >= kg.relation_count()) {
      return false;
    }
    if (!kg.has_edge(path.entities[i], path.relations[i], path.entities[i + 1])) {
      return false;
    }
  }
  return true;
}

std::string serialize_path(const Path& path, const KnowledgeGraph& kg) {
  std::string out = kg.entity_key(path.entities.front());
  for (std::size_t i = 0; i < path.hops(); ++i) {
    out += '|';
    out += kg.relation_name(path.relations[i]);
    out += '|';
    out += kg.entity_key(path.entities[i + 1]);
  }
  return out;
}

Path parse_path(std::string_view text, const KnowledgeGraph& kg) {
  const auto parts = text::split(text, '|');
  if (parts.size() < 3 || parts.size() % 2 == 0) {
    throw FormatError("malformed path '" + std::string(text) + "'");
  }
  Path path;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i % 2 == 0) {
      const auto e = kg.find_entity(parts[i]);
      if (!e) throw FormatError("unknown entity '" + std::string(parts[i]) + "' in path");
      path.entities.push_back(*e);
    } else {
      const auto r = kg.find_relation(parts[i]);
      if (!r) throw FormatError("unknown relation '" + std::string(parts[i]) + "' in path");
      path.relations.push_back(*r);
    }
  }
  return path;
}

std::string serialize_paths(const std::vector<Path>& paths, const KnowledgeGraph& kg) {
  if (paths.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (i > 0) out += ';';
    out += serialize_path(paths[i], kg);
  }
  return out;
}

std::vector<Path> parse_paths(std::string_view text, const KnowledgeGraph& kg) {
  std::vector<Path> paths;
  if (text == "-" || text.empty()) return paths;
  for (const auto part : text::split(text, ';')) paths.push_back(parse_path(part, kg));
  return paths;
}

}  // namespace pathkg
