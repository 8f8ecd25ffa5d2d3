#include "pathkg/stats.hpp"

#include <algorithm>
#include <set>

#include "pathkg/text.hpp"

namespace pathkg {

DatasetStats graph_stats(const KnowledgeGraph& kg) {
  DatasetStats s;
  s.triples = kg.triples().size();
  s.relation_types = kg.base_relation_count();
  s.entities = kg.entity_count();
  return s;
}

DatasetStats graph_stats(const KnowledgeGraph& kg, std::span<const QueryInstance> corpus) {
  auto s = graph_stats(kg);
  std::size_t paths = 0;
  std::size_t hops = 0;
  std::size_t max_len = 0;
  std::size_t positives = 0;
  std::set<RelationId> queries;
  for (const auto& inst : corpus) {
    queries.insert(inst.relation);
    if (inst.label == Label::positive) ++positives;
    for (const auto& p : inst.paths) {
      ++paths;
      hops += p.hops();
      max_len = std::max(max_len, p.hops());
    }
  }
  const auto nq = static_cast<double>(queries.size());
  s.paths = paths;
  s.max_path_length = max_len;
  s.avg_path_length = paths == 0 ? 0.0 : static_cast<double>(hops) / static_cast<double>(paths);
  s.avg_paths_per_query_relation = nq == 0 ? 0.0 : static_cast<double>(paths) / nq;
  s.avg_positive_per_query_relation = nq == 0 ? 0.0 : static_cast<double>(positives) / nq;
  s.avg_negative_per_query_relation =
      nq == 0 ? 0.0 : static_cast<double>(corpus.size() - positives) / nq;
  return s;
}

std::string format_stats(const DatasetStats& s) {
  std::string out;
  const auto line = [&](std::string_view key, const std::string& value) {
    out += key;
    out += '\t';
    out += value;
    out += '\n';
  };
  line("# Triples", std::to_string(s.triples));
  line("# Relation types", std::to_string(s.relation_types));
  line("# Entities", std::to_string(s.entities));
  if (s.paths) line("# Paths", std::to_string(*s.paths));
  if (s.avg_paths_per_query_relation) {
    line("Avg. paths/query relation", text::format_double(*s.avg_paths_per_query_relation));
  }
  if (s.avg_path_length) line("Avg. path length", text::format_double(*s.avg_path_length));
  if (s.max_path_length) line("Max path length", std::to_string(*s.max_path_length));
  if (s.avg_positive_per_query_relation) {
    line("Avg. positive instances/query relation",
         text::format_double(*s.avg_positive_per_query_relation));
  }
  if (s.avg_negative_per_query_relation) {
    line("Avg. negative instances/query relation",
         text::format_double(*s.avg_negative_per_query_relation));
  }
  return out;
}

}  // namespace pathkg
