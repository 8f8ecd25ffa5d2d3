#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pathkg/dataset.hpp"
#include "pathkg/graph.hpp"
#include "pathkg/path.hpp"

namespace pathkg {

enum class StatementKind : std::uint8_t { entity, path };

struct Statement {
  std::uint64_t key = 0;  // fnv1a64(text)
  std::string text;
  StatementKind kind = StatementKind::entity;
};

Statement make_statement(std::string text, StatementKind kind);

struct StatementStyle {
  std::string descriptor_separator;  // between name, category, type
  std::string clause_separator;      // between path clauses
  std::string terminator;

  static StatementStyle cjk() { return {", ", "，", "。"}; }
  static StatementStyle latin() { return {", ", ", ", "."}; }
};

// A surface string with exactly one `{head}` and one `{tail}`.
class RelationTemplate {
 public:
  explicit RelationTemplate(std::string surface);

  std::string render(std::string_view head, std::string_view tail) const;
  const std::string& surface() const { return surface_; }

 private:
  std::string surface_;
};

// Templates keyed by base relation; inverse relations render their base
// template with head and tail swapped.
class TemplateSet {
 public:
  void add(RelationId base_relation, RelationTemplate t);
  const RelationTemplate* find(RelationId base_relation) const;
  std::size_t size() const { return templates_.size(); }
  const std::map<RelationId, RelationTemplate>& entries() const { return templates_; }

 private:
  std::map<RelationId, RelationTemplate> templates_;
};

// `relation<TAB>surface` lines; relations must exist in `kg`.
TemplateSet load_templates(std::istream& in, const KnowledgeGraph& kg,
                           const std::string& source = "templates");
TemplateSet load_template_file(const std::string& path, const KnowledgeGraph& kg);
void write_templates(std::ostream& out, const KnowledgeGraph& kg, const TemplateSet& templates);

// name, category, first type (missing parts omitted) plus terminator.
Statement entity_statement(const EntityMeta& meta,
                           const StatementStyle& style = StatementStyle::cjk());

Statement entity_statement(const KnowledgeGraph& kg, EntityId e,
                           const StatementStyle& style = StatementStyle::cjk());

// One template clause per hop. Throws ConfigError for a relation without a
// template.
Statement path_statement(const Path& path, const KnowledgeGraph& kg,
                         const TemplateSet& templates,
                         const StatementStyle& style = StatementStyle::cjk());

// Entity statements for every entity, then (with templates) the statement of
// every path in `instances`. First-occurrence order, unique keys.
std::vector<Statement> collect_statements(const KnowledgeGraph& kg,
                                          const TemplateSet* templates,
                                          std::span<const QueryInstance> instances,
                                          const StatementStyle& style = StatementStyle::cjk());

// `key-hex<TAB>text` per line.
void write_statements(std::ostream& out, const std::vector<Statement>& statements);
std::vector<Statement> read_statements(std::istream& in);

}  // namespace pathkg
