#include "pathkg/verbalizer.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "pathkg/errors.hpp"
#include "pathkg/text.hpp"

namespace pathkg {

namespace {

constexpr std::string_view kHead = "{head}";
constexpr std::string_view kTail = "{tail}";

std::size_t count_of(std::string_view s, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string_view::npos;
       pos = s.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace

Statement make_statement(std::string text, StatementKind kind) {
  Statement s;
  s.key = text::fnv1a64(text);
  s.text = std::move(text);
  s.kind = kind;
  return s;
}

RelationTemplate::RelationTemplate(std::string surface) : surface_(std::move(surface)) {
  if (count_of(surface_, kHead) != 1 || count_of(surface_, kTail) != 1) {
    throw ConfigError("template '" + surface_ +
                      "' must contain {head} and {tail} exactly once");
  }
}

std::string RelationTemplate::render(std::string_view head, std::string_view tail) const {
  std::string out;
  out.reserve(surface_.size() + head.size() + tail.size());
  std::string_view rest = surface_;
  while (!rest.empty()) {
    if (rest.starts_with(kHead)) {
      out += head;
      rest.remove_prefix(kHead.size());
    } else if (rest.starts_with(kTail)) {
      out += tail;
      rest.remove_prefix(kTail.size());
    } else {
      out += rest.front();
      rest.remove_prefix(1);
    }
  }
  return out;
}

void TemplateSet::add(RelationId base_relation, RelationTemplate t) {
  templates_.insert_or_assign(base_relation, std::move(t));
}

const RelationTemplate* TemplateSet::find(RelationId base_relation) const {
  const auto it = templates_.find(base_relation);
  return it == templates_.end() ? nullptr : &it->second;
}

TemplateSet load_templates(std::istream& in, const KnowledgeGraph& kg,
                           const std::string& source) {
  TemplateSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = text::strip_cr(line);
    if (content.empty()) continue;
    const auto tab = content.find('\t');
    if (tab == std::string_view::npos) {
      throw ParseError(source, line_no, "expected relation<TAB>surface");
    }
    const auto name = content.substr(0, tab);
    const auto rel = kg.find_relation(name);
    if (!rel || kg.is_inverse(*rel)) {
      throw ParseError(source, line_no, "unknown relation '" + std::string(name) + "'");
    }
    try {
      set.add(*rel, RelationTemplate(std::string(content.substr(tab + 1))));
    } catch (const ConfigError& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return set;
}

void write_templates(std::ostream& out, const KnowledgeGraph& kg,
                     const TemplateSet& templates) {
  for (const auto& [rel, tmpl] : templates.entries()) {
    out << kg.relation_name(rel) << '\t' << tmpl.surface() << '\n';
  }
}

TemplateSet load_template_file(const std::string& path, const KnowledgeGraph& kg) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return load_templates(in, kg, path);
}

Statement entity_statement(const EntityMeta& meta, const StatementStyle& style) {
  std::string text = meta.name;
  if (meta.category) text += style.descriptor_separator + *meta.category;
  if (!meta.types.empty()) text += style.descriptor_separator + meta.types.front();
  text += style.terminator;
  return make_statement(std::move(text), StatementKind::entity);
}

Statement entity_statement(const KnowledgeGraph& kg, EntityId e,
                           const StatementStyle& style) {
  return entity_statement(kg.meta(e), style);
}

Statement path_statement(const Path& path, const KnowledgeGraph& kg,
                         const TemplateSet& templates, const StatementStyle& style) {
  std::string text;
  for (std::size_t i = 0; i < path.hops(); ++i) {
    const auto rel = path.relations[i];
    const auto base = kg.base_relation(rel);
    const auto* tmpl = templates.find(base);
    if (tmpl == nullptr) {
      throw ConfigError("no template for relation '" + kg.relation_name(base) + "'");
    }
    const auto& from = kg.entity_name(path.entities[i]);
    const auto& to = kg.entity_name(path.entities[i + 1]);
    if (i > 0) text += style.clause_separator;
    text += kg.is_inverse(rel) ? tmpl->render(to, from) : tmpl->render(from, to);
  }
  text += style.terminator;
  return make_statement(std::move(text), StatementKind::path);
}

std::vector<Statement> collect_statements(const KnowledgeGraph& kg,
                                          const TemplateSet* templates,
                                          std::span<const QueryInstance> instances,
                                          const StatementStyle& style) {
  std::vector<Statement> out;
  std::unordered_set<std::uint64_t> seen;
  const auto add = [&](Statement s) {
    if (seen.insert(s.key).second) out.push_back(std::move(s));
  };
  for (std::uint32_t e = 0; e < kg.entity_count(); ++e) {
    add(entity_statement(kg, static_cast<EntityId>(e), style));
  }
  if (templates == nullptr) return out;
  for (const auto& inst : instances) {
    for (const auto& path : inst.paths) add(path_statement(path, kg, *templates, style));
  }
  return out;
}

void write_statements(std::ostream& out, const std::vector<Statement>& statements) {
  for (const auto& s : statements) out << text::hex64(s.key) << '\t' << s.text << '\n';
}

std::vector<Statement> read_statements(std::istream& in) {
  std::vector<Statement> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = text::strip_cr(line);
    if (content.empty()) continue;
    const auto tab = content.find('\t');
    const auto key = tab == std::string_view::npos
                         ? std::nullopt
                         : text::parse_hex64(content.substr(0, tab));
    if (!key) throw ParseError("statements", line_no, "expected key-hex<TAB>text");
    Statement s = make_statement(std::string(content.substr(tab + 1)), StatementKind::path);
    if (s.key != *key) throw ParseError("statements", line_no, "key does not match text");
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace pathkg
