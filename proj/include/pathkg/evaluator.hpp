#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathkg/dataset.hpp"
#include "pathkg/model.hpp"

namespace pathkg {

// AP over a ranked relevance list (best first); nullopt when nothing is
// relevant.
std::optional<double> average_precision(const std::vector<bool>& ranked);

struct ScoredInstance {
  RelationId relation{};
  Label label = Label::negative;
  double score = 0.0;  // logit; 0 for instances without paths
  std::string tie_key;  // serialized instance
};

std::vector<ScoredInstance> score_instances(std::span<const QueryInstance> instances,
                                            const ModelParams& params,
                                            const FeatureContext& ctx,
                                            unsigned workers = 1);

struct RelationAP {
  RelationId relation{};
  std::string name;
  double ap = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

struct EvalReport {
  std::string model;
  std::vector<RelationAP> rows;        // by relation id
  std::vector<std::string> skipped;    // relations without positives
  double map = 0.0;
};

// Ranks each relation's instances by descending score, then ascending
// tie_key, and averages the per-relation APs.
EvalReport mean_average_precision(std::span<const ScoredInstance> scored,
                                  const KnowledgeGraph& kg, std::string model);

// `relation<TAB>AP<TAB>pos<TAB>neg` rows followed by `MAP<TAB>value`.
void write_report(std::ostream& out, const EvalReport& report);

struct WeightedStatement {
  std::string text;
  double alpha = 0.0;
};

struct Explanation {
  std::string query;  // relation(head, tail)?
  std::optional<WeightedStatement> high;
  std::optional<WeightedStatement> low;
  double probability = 0.5;
};

// Highest and lowest attention paths rendered as statements. Without paths
// the high/low rows are absent.
Explanation explain_instance(const QueryInstance& inst, const ForwardTrace& trace,
                             const KnowledgeGraph& kg, const TemplateSet& templates,
                             const StatementStyle& style = StatementStyle::cjk());

std::string render_explanation(const Explanation& e);

}  // namespace pathkg
