#include "pathkg/evaluator.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include "pathkg/parallel.hpp"
#include "pathkg/text.hpp"

namespace pathkg {

std::optional<double> average_precision(const std::vector<bool>& ranked) {
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (!ranked[k]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<double>(hits);
}

std::vector<ScoredInstance> score_instances(std::span<const QueryInstance> instances,
                                            const ModelParams& params,
                                            const FeatureContext& ctx, unsigned workers) {
  std::vector<ScoredInstance> out(instances.size());
  parallel_for(instances.size(), workers, [&](std::size_t i) {
    const auto& inst = instances[i];
    const auto tr = score_pair(ctx.features(inst), params, ctx);
    out[i] = {inst.relation, inst.label, tr.logit, serialize_instance(inst, ctx.graph())};
  });
  return out;
}

EvalReport mean_average_precision(std::span<const ScoredInstance> scored,
                                  const KnowledgeGraph& kg, std::string model) {
  std::map<RelationId, std::vector<const ScoredInstance*>> groups;
  for (const auto& s : scored) groups[s.relation].push_back(&s);

  EvalReport report;
  report.model = std::move(model);
  double sum = 0.0;
  for (auto& [relation, items] : groups) {
    std::sort(items.begin(), items.end(), [](const auto* a, const auto* b) {
      if (a->score != b->score) return a->score > b->score;
      return a->tie_key < b->tie_key;
    });
    std::vector<bool> ranked;
    ranked.reserve(items.size());
    for (const auto* s : items) ranked.push_back(s->label == Label::positive);
    const auto positives =
        static_cast<std::size_t>(std::count(ranked.begin(), ranked.end(), true));
    const auto ap = average_precision(ranked);
    if (!ap) {
      report.skipped.push_back(kg.relation_name(relation));
      continue;
    }
    report.rows.push_back(
        {relation, kg.relation_name(relation), *ap, positives, items.size() - positives});
    sum += *ap;
  }
  if (!report.rows.empty()) report.map = sum / static_cast<double>(report.rows.size());
  return report;
}

void write_report(std::ostream& out, const EvalReport& report) {
  for (const auto& row : report.rows) {
    out << row.name << '\t' << text::format_double(row.ap) << '\t' << row.positives << '\t'
        << row.negatives << '\n';
  }
  out << "MAP\t" << text::format_double(report.map) << '\n';
}

Explanation explain_instance(const QueryInstance& inst, const ForwardTrace& trace,
                             const KnowledgeGraph& kg, const TemplateSet& templates,
                             const StatementStyle& style) {
  Explanation e;
  e.query = kg.relation_name(inst.relation) + "(" + kg.entity_name(inst.head) + ", " +
            kg.entity_name(inst.tail) + ")?";
  e.probability = trace.probability;
  if (trace.no_evidence) return e;

  // The trace follows the sorted path order used by the feature context.
  std::vector<Path> paths = inst.paths;
  std::sort(paths.begin(), paths.end());
  const auto& alpha = trace.attention.alpha;
  Eigen::Index hi = 0;
  for (Eigen::Index i = 1; i < alpha.size(); ++i) {
    if (alpha(i) > alpha(hi)) hi = i;
  }
  // With two or more paths the low row names a different path, even on ties.
  Eigen::Index lo = alpha.size() > 1 && hi == 0 ? 1 : 0;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (i != hi && alpha(i) < alpha(lo)) lo = i;
  }
  const auto row = [&](Eigen::Index i) {
    return WeightedStatement{
        path_statement(paths[static_cast<std::size_t>(i)], kg, templates, style).text,
        alpha(i)};
  };
  e.high = row(hi);
  e.low = row(lo);
  return e;
}

std::string render_explanation(const Explanation& e) {
  std::string out = "Query\t" + e.query + "\n";
  if (!e.high) {
    out += "Evidence\tnone\n";
  } else {
    out += "High weight\t" + e.high->text + "\t" + text::format_double(e.high->alpha) + "\n";
    out += "Low weight\t" + e.low->text + "\t" + text::format_double(e.low->alpha) + "\n";
  }
  out += "P\t" + text::format_double(e.probability) + "\n";
  return out;
}

}  // namespace pathkg
