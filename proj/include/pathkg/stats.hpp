#pragma once

#include <optional>
#include <span>
#include <string>

#include "pathkg/dataset.hpp"
#include "pathkg/graph.hpp"

namespace pathkg {

// Corpus statistics over base triples and relations. Path and instance
// fields are only filled when a path corpus is supplied.
struct DatasetStats {
  std::size_t triples = 0;
  std::size_t relation_types = 0;
  std::size_t entities = 0;
  std::optional<std::size_t> paths;
  std::optional<double> avg_paths_per_query_relation;
  std::optional<double> avg_path_length;
  std::optional<std::size_t> max_path_length;
  std::optional<double> avg_positive_per_query_relation;
  std::optional<double> avg_negative_per_query_relation;
};

DatasetStats graph_stats(const KnowledgeGraph& kg);
DatasetStats graph_stats(const KnowledgeGraph& kg, std::span<const QueryInstance> corpus);

// `key<TAB>value` lines.
std::string format_stats(const DatasetStats& stats);

}  // namespace pathkg
