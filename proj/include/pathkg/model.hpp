#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pathkg/dataset.hpp"
#include "pathkg/embedding.hpp"
#include "pathkg/graph.hpp"
#include "pathkg/verbalizer.hpp"

namespace pathkg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// A: path RNN over relation embeddings and text-enhanced entities.
// B: attention over text-encoded path statements.
enum class ModelKind : std::uint8_t { entity_text_rnn, path_text };

std::string_view model_tag(ModelKind kind);  // "A" / "B"
ModelKind parse_model_kind(std::string_view tag);

struct HyperParams {
  std::uint32_t d = 50;   // relation and hidden width
  std::uint32_t m = 50;   // entity-type width
  std::uint32_t H = 768;  // text width, fixed by the embedding source
  double lambda = 1e-5;
  bool l2_embeddings = true;
  // Query relations reuse the path relation table (model A only).
  bool share_query_embeddings = false;
};

void validate(const HyperParams& hp, ModelKind kind);

// Trainable tensors. Embedding tables store one column per id. Tensors the
// model kind does not use are left empty (0 x 0).
struct ModelParams {
  ModelKind kind = ModelKind::entity_text_rnn;
  HyperParams hp;
  std::uint32_t relation_count = 0;  // including inverses
  std::uint32_t query_count = 0;     // base relations
  std::uint32_t type_count = 0;      // excluding the shared untyped column

  Matrix relation;    // d x relation_count                      (A)
  Matrix query;       // d x query_count (empty when shared)
  Matrix type;        // m x (type_count + 1), last = untyped    (A)
  Matrix dummy;       // d x 1, r_dummy                          (A)
  Matrix w_hidden;    // d x d, W1                               (A)
  Matrix w_relation;  // d x d, W2                               (A)
  Matrix w_entity;    // d x (m + H), W3                         (A)
  Matrix attention;   // d x d, T
  Matrix projection;  // d x H, W_p                              (B)
  Matrix bias;        // d x 1, b_p                              (B)

  // Visits non-empty tensors in declaration order.
  template <typename Fn>
  void for_each(Fn&& fn) {
    visit(*this, fn);
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    visit(*this, fn);
  }

  ModelParams zeros_like() const;
  std::size_t parameter_count() const;

  // The query embedding column for base relation `r`.
  auto query_vector(RelationId r) const {
    return hp.share_query_embeddings ? relation.col(index(r)) : query.col(index(r));
  }

 private:
  template <typename Self, typename Fn>
  static void visit(Self& self, Fn& fn) {
    const auto each = [&](std::string_view name, auto& tensor) {
      if (tensor.size() > 0) fn(name, tensor);
    };
    each("relation_embeddings", self.relation);
    each("query_embeddings", self.query);
    each("type_embeddings", self.type);
    each("dummy_relation", self.dummy);
    each("rnn_hidden", self.w_hidden);
    each("rnn_relation", self.w_relation);
    each("rnn_entity", self.w_entity);
    each("attention", self.attention);
    each("path_projection", self.projection);
    each("path_bias", self.bias);
  }
};

// Entries uniform in (-1/sqrt(fan_in), 1/sqrt(fan_in)); for model B with
// d == H the projection starts as the identity with zero bias.
ModelParams init_params(ModelKind kind, const HyperParams& hp,
                        std::uint32_t relation_count, std::uint32_t query_count,
                        std::uint32_t type_count, std::uint64_t seed);

ModelParams init_params(ModelKind kind, const HyperParams& hp, const KnowledgeGraph& kg,
                        std::uint64_t seed);

// Model inputs derived from one QueryInstance. Paths are kept in the fixed
// summation order (sorted).
struct PathFeatures {
  std::vector<RelationId> relations;
  std::vector<EntityId> entities;
  std::uint64_t statement_key = 0;
};

struct InstanceFeatures {
  RelationId query{};
  Label label = Label::negative;
  std::vector<PathFeatures> paths;
};

// Everything the models read besides parameters: entity types and the text
// vectors of entity and path statements, resolved once for an instance set.
class FeatureContext {
 public:
  FeatureContext(const KnowledgeGraph& kg, const TemplateSet* templates,
                 const TextEmbeddingStore& store, LookupMode mode,
                 std::span<const QueryInstance> instances, ModelKind kind,
                 const StatementStyle& style = StatementStyle::cjk());

  InstanceFeatures features(const QueryInstance& inst) const;

  const KnowledgeGraph& graph() const { return *kg_; }
  std::uint32_t text_dim() const { return table_.dim(); }
  std::span<const double> entity_text(EntityId e) const;
  std::span<const double> statement_text(std::uint64_t key) const { return table_.at(key); }
  std::uint64_t entity_statement_key(EntityId e) const;
  std::uint64_t path_statement_key(const Path& path) const;

 private:
  std::vector<std::uint64_t> collect_keys(std::span<const QueryInstance> instances,
                                          ModelKind kind) const;

  const KnowledgeGraph* kg_;
  const TemplateSet* templates_;
  StatementStyle style_;
  ModelKind kind_;
  std::vector<std::uint64_t> entity_keys_;
  EmbeddingTable table_;
};

// concat(mean type embedding or the untyped column, entity statement vector).
Vector enhance_entity(EntityId e, const ModelParams& params, const FeatureContext& ctx);

struct PathTrace {
  std::vector<Vector> pre;        // a_1 .. a_{L+1}                (A)
  std::vector<Vector> hidden;     // h_0 .. h_{L+1}                (A)
  std::vector<Vector> entities;   // enhanced e_0 .. e_L           (A)
  Vector pi;
};

PathTrace trace_path_A(const PathFeatures& path, const ModelParams& params,
                       const FeatureContext& ctx);
PathTrace trace_path_B(const PathFeatures& path, const ModelParams& params,
                       const FeatureContext& ctx);
Vector encode_path_A(const PathFeatures& path, const ModelParams& params,
                     const FeatureContext& ctx);
Vector encode_path_B(const PathFeatures& path, const ModelParams& params,
                     const FeatureContext& ctx);

struct Attention {
  std::vector<Vector> match;  // tanh(T^T pi_i)
  Vector z;
  Vector alpha;
  Vector ep;
};

// exp(z - max z) normalized; requires a non-empty input.
Vector softmax(const Vector& z);

// z_i = tanh(pi_i T) . delta, alpha = softmax(z), ep = tanh(sum alpha_i pi_i).
// Requires at least one path vector.
Attention attend(std::span<const Vector> pis, const Eigen::Ref<const Vector>& query,
                 const Matrix& attention);

inline constexpr double kProbabilityEpsilon = 1e-12;

struct ForwardTrace {
  RelationId query{};
  Label label = Label::negative;
  bool no_evidence = true;
  std::vector<PathTrace> paths;
  Attention attention;
  double logit = 0.0;
  double probability = 0.5;  // clamped to [eps, 1 - eps]
};

ForwardTrace score_pair(const InstanceFeatures& inst, const ModelParams& params,
                        const FeatureContext& ctx);

double instance_nll(const ForwardTrace& trace);

// Sum of the L2 penalty over every tensor the model uses; embedding tables
// count only the columns touched by `batch`.
double l2_penalty(const ModelParams& params, std::span<const InstanceFeatures> batch,
                  const FeatureContext& ctx);

double loss_batch(std::span<const ForwardTrace> traces, const ModelParams& params,
                  std::span<const InstanceFeatures> batch, const FeatureContext& ctx);

// Accumulates d(instance NLL)/d(params) into `grad`.
void backprop(const ForwardTrace& trace, const InstanceFeatures& inst,
              const ModelParams& params, const FeatureContext& ctx, ModelParams& grad);

// Adds the gradient of the L2 penalty (2 * lambda * theta on used entries).
void add_l2_gradient(const ModelParams& params, std::span<const InstanceFeatures> batch,
                     const FeatureContext& ctx, ModelParams& grad);

struct BatchGradient {
  ModelParams grad;
  double loss = 0.0;
};

// Exact gradient of loss_batch. Per-instance gradients are reduced in batch
// order, so the result does not depend on `workers`.
BatchGradient grad_batch(std::span<const InstanceFeatures> batch,
                         const ModelParams& params, const FeatureContext& ctx,
                         unsigned workers = 1);

// Checkpoints: a text header (model kind, dims, seed, vocabularies, tensor
// table) followed by the tensors as little-endian f32 in declaration order.
struct CheckpointInfo {
  std::uint64_t seed = 0;
  std::vector<std::string> relations;  // all relation names, by id
  std::vector<std::string> types;      // type vocabulary, by id
};

CheckpointInfo checkpoint_info(const KnowledgeGraph& kg, std::uint64_t seed);

void write_checkpoint(std::ostream& out, const ModelParams& params,
                      const CheckpointInfo& info);
std::pair<ModelParams, CheckpointInfo> read_checkpoint(std::istream& in);
void write_checkpoint_file(const std::string& path, const ModelParams& params,
                           const CheckpointInfo& info);
std::pair<ModelParams, CheckpointInfo> read_checkpoint_file(const std::string& path);

// Throws ConfigError when the checkpoint vocabularies do not match `kg`.
void check_compatible(const CheckpointInfo& info, const KnowledgeGraph& kg);

}  // namespace pathkg
