#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pathkg/graph.hpp"
#include "pathkg/path.hpp"

namespace pathkg {

struct WalkConfig {
  std::uint32_t max_len = 7;
  std::uint32_t walks_per_pair = 1000;
  std::uint64_t seed = 0;
  bool dedupe = true;
  bool exclude_direct = true;
  // Applied by the dataset builder, not by sample_paths.
  std::size_t path_cap = 200;
};

void validate(const WalkConfig& cfg);

// Seeded uniform random walks from `source`; a walk is harvested (and ends)
// the first time it reaches `target`. When `hidden_relation` is set (and
// cfg.exclude_direct), the fact edge (source, r, target) and its stored
// inverse are not traversable. The walk RNG is derived from
// (cfg.seed, source, target), so the result is a pure function of its inputs.
// Returned paths are sorted (see operator< on Path).
std::vector<Path> sample_paths(const KnowledgeGraph& kg, EntityId source,
                               EntityId target, const WalkConfig& cfg,
                               std::optional<RelationId> hidden_relation = {});

// Exhaustive depth-bounded search with the same semantics as the walks:
// entity revisits allowed, the path ends on first arrival at `target`.
std::vector<Path> enumerate_paths(const KnowledgeGraph& kg, EntityId source,
                                  EntityId target, std::uint32_t max_len,
                                  std::optional<RelationId> hidden_relation = {});

// Keeps the first `cap` paths of a sorted list (shortest first, then
// lexicographic).
std::vector<Path> cap_paths(std::vector<Path> sorted_paths, std::size_t cap);

struct PairPaths {
  EntityId source;
  EntityId target;
  std::vector<Path> paths;
};

// `source<TAB>target<TAB>path;path;...`, `-` for an empty set.
void write_path_file(std::ostream& out, const KnowledgeGraph& kg,
                     const std::vector<PairPaths>& records);
std::vector<PairPaths> read_path_file(std::istream& in, const KnowledgeGraph& kg);

}  // namespace pathkg
