#include "pathkg/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pathkg/errors.hpp"
#include "pathkg/parallel.hpp"
#include "pathkg/rng.hpp"

namespace pathkg {

std::string_view model_tag(ModelKind kind) {
  return kind == ModelKind::entity_text_rnn ? "A" : "B";
}

ModelKind parse_model_kind(std::string_view tag) {
  if (tag == "A" || tag == "a" || tag == "entity") return ModelKind::entity_text_rnn;
  if (tag == "B" || tag == "b" || tag == "path") return ModelKind::path_text;
  throw ConfigError("unknown model kind '" + std::string(tag) + "' (expected A or B)");
}

void validate(const HyperParams& hp, ModelKind kind) {
  if (hp.d < 1 || hp.m < 1 || hp.H < 1) throw ConfigError("d, m and H must be >= 1");
  if (!(hp.lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (hp.share_query_embeddings && kind == ModelKind::path_text) {
    throw ConfigError("shared query embeddings need relation embeddings (model A)");
  }
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  z.for_each([](std::string_view, Matrix& t) { t.setZero(); });
  return z;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for_each([&](std::string_view, const Matrix& t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

ModelParams init_params(ModelKind kind, const HyperParams& hp,
                        std::uint32_t relation_count, std::uint32_t query_count,
                        std::uint32_t type_count, std::uint64_t seed) {
  validate(hp, kind);
  ModelParams p;
  p.kind = kind;
  p.hp = hp;
  p.relation_count = relation_count;
  p.query_count = query_count;
  p.type_count = type_count;
  const Eigen::Index d = hp.d, m = hp.m, H = hp.H;
  if (kind == ModelKind::entity_text_rnn) {
    p.relation.resize(d, relation_count);
    p.type.resize(m, type_count + 1);
    p.dummy.resize(d, 1);
    p.w_hidden.resize(d, d);
    p.w_relation.resize(d, d);
    p.w_entity.resize(d, m + H);
  } else {
    p.projection.resize(d, H);
    p.bias.resize(d, 1);
  }
  if (!hp.share_query_embeddings) p.query.resize(d, query_count);
  p.attention.resize(d, d);

  Rng rng(derive_seed(seed, 0x696e6974ULL));
  const auto fill = [&](Matrix& t, double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      for (Eigen::Index r = 0; r < t.rows(); ++r) {
        t(r, c) = (2.0 * uniform_real(rng) - 1.0) * bound;
      }
    }
  };
  // Embedding entries use their own width as fan-in.
  fill(p.relation, static_cast<double>(d));
  fill(p.query, static_cast<double>(d));
  fill(p.type, static_cast<double>(m));
  fill(p.dummy, static_cast<double>(d));
  fill(p.w_hidden, static_cast<double>(d));
  fill(p.w_relation, static_cast<double>(d));
  fill(p.w_entity, static_cast<double>(m + H));
  fill(p.attention, static_cast<double>(d));
  if (kind == ModelKind::path_text) {
    if (d == H) {
      p.projection.setIdentity();
      p.bias.setZero();
    } else {
      fill(p.projection, static_cast<double>(H));
      fill(p.bias, static_cast<double>(H));
    }
  }
  return p;
}

ModelParams init_params(ModelKind kind, const HyperParams& hp, const KnowledgeGraph& kg,
                        std::uint64_t seed) {
  return init_params(kind, hp, static_cast<std::uint32_t>(kg.relation_count()),
                     static_cast<std::uint32_t>(kg.base_relation_count()),
                     static_cast<std::uint32_t>(kg.type_vocabulary().size()), seed);
}

// ---------------------------------------------------------------------------
// FeatureContext

namespace {

std::vector<std::uint64_t> all_entity_keys(const KnowledgeGraph& kg,
                                           const StatementStyle& style) {
  std::vector<std::uint64_t> keys(kg.entity_count());
  for (std::uint32_t e = 0; e < kg.entity_count(); ++e) {
    keys[e] = entity_statement(kg, static_cast<EntityId>(e), style).key;
  }
  return keys;
}

}  // namespace

FeatureContext::FeatureContext(const KnowledgeGraph& kg, const TemplateSet* templates,
                               const TextEmbeddingStore& store, LookupMode mode,
                               std::span<const QueryInstance> instances, ModelKind kind,
                               const StatementStyle& style)
    : kg_(&kg),
      templates_(templates),
      style_(style),
      kind_(kind),
      entity_keys_(all_entity_keys(kg, style)),
      table_(store, mode, collect_keys(instances, kind)) {}

std::vector<std::uint64_t> FeatureContext::collect_keys(
    std::span<const QueryInstance> instances, ModelKind kind) const {
  std::vector<std::uint64_t> keys;
  for (const auto& inst : instances) {
    for (const auto& path : inst.paths) {
      if (kind == ModelKind::entity_text_rnn) {
        for (const auto e : path.entities) keys.push_back(entity_keys_[index(e)]);
      } else {
        keys.push_back(path_statement_key(path));
      }
    }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

std::uint64_t FeatureContext::entity_statement_key(EntityId e) const {
  return entity_keys_.at(index(e));
}

std::uint64_t FeatureContext::path_statement_key(const Path& path) const {
  if (templates_ == nullptr) throw ConfigError("path statements need relation templates");
  return path_statement(path, *kg_, *templates_, style_).key;
}

std::span<const double> FeatureContext::entity_text(EntityId e) const {
  return table_.at(entity_statement_key(e));
}

InstanceFeatures FeatureContext::features(const QueryInstance& inst) const {
  InstanceFeatures f;
  f.query = inst.relation;
  f.label = inst.label;
  std::vector<std::size_t> order(inst.paths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return inst.paths[a] < inst.paths[b]; });
  for (const auto i : order) {
    const auto& path = inst.paths[i];
    PathFeatures pf;
    pf.relations = path.relations;
    pf.entities = path.entities;
    if (kind_ == ModelKind::path_text) pf.statement_key = path_statement_key(path);
    f.paths.push_back(std::move(pf));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Forward

namespace {

Eigen::Map<const Vector> as_vector(std::span<const double> s) {
  return {s.data(), static_cast<Eigen::Index>(s.size())};
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Vector enhance_entity(EntityId e, const ModelParams& params, const FeatureContext& ctx) {
  const auto m = static_cast<Eigen::Index>(params.hp.m);
  const auto text = ctx.entity_text(e);
  Vector out(m + static_cast<Eigen::Index>(text.size()));
  const auto types = ctx.graph().entity_types(e);
  if (types.empty()) {
    out.head(m) = params.type.col(params.type_count);
  } else {
    out.head(m).setZero();
    for (const auto t : types) out.head(m) += params.type.col(t);
    out.head(m) /= static_cast<double>(types.size());
  }
  out.tail(static_cast<Eigen::Index>(text.size())) = as_vector(text);
  return out;
}

PathTrace trace_path_A(const PathFeatures& path, const ModelParams& params,
                       const FeatureContext& ctx) {
  const auto L = path.relations.size();
  PathTrace tr;
  tr.hidden.reserve(L + 2);
  tr.pre.reserve(L + 1);
  tr.entities.reserve(L + 1);
  tr.hidden.push_back(Vector::Zero(params.hp.d));
  for (std::size_t step = 0; step <= L; ++step) {
    tr.entities.push_back(enhance_entity(path.entities[step], params, ctx));
    Vector a = params.w_hidden * tr.hidden.back() + params.w_entity * tr.entities.back();
    if (step < L) {
      a.noalias() += params.w_relation * params.relation.col(index(path.relations[step]));
    } else {
      a.noalias() += params.w_relation * params.dummy.col(0);
    }
    tr.hidden.push_back(a.cwiseMax(0.0));
    tr.pre.push_back(std::move(a));
  }
  tr.pi = tr.hidden.back();
  return tr;
}

PathTrace trace_path_B(const PathFeatures& path, const ModelParams& params,
                       const FeatureContext& ctx) {
  PathTrace tr;
  tr.pi = params.projection * as_vector(ctx.statement_text(path.statement_key)) +
          params.bias.col(0);
  return tr;
}

Vector encode_path_A(const PathFeatures& path, const ModelParams& params,
                     const FeatureContext& ctx) {
  return trace_path_A(path, params, ctx).pi;
}

Vector encode_path_B(const PathFeatures& path, const ModelParams& params,
                     const FeatureContext& ctx) {
  return trace_path_B(path, params, ctx).pi;
}

Vector softmax(const Vector& z) {
  if (z.size() == 0) throw ConfigError("softmax of an empty vector");
  Vector out = (z.array() - z.maxCoeff()).exp().matrix();
  return out / out.sum();
}

Attention attend(std::span<const Vector> pis, const Eigen::Ref<const Vector>& query,
                 const Matrix& attention) {
  if (pis.empty()) throw ConfigError("attention needs at least one path");
  const auto n = static_cast<Eigen::Index>(pis.size());
  Attention att;
  att.z.resize(n);
  att.match.reserve(pis.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    att.match.push_back((attention.transpose() * pis[static_cast<std::size_t>(i)])
                            .array()
                            .tanh()
                            .matrix());
    att.z(i) = att.match.back().dot(query);
  }
  att.alpha = softmax(att.z);
  Vector pooled = Vector::Zero(pis.front().size());
  for (Eigen::Index i = 0; i < n; ++i) pooled += att.alpha(i) * pis[static_cast<std::size_t>(i)];
  att.ep = pooled.array().tanh().matrix();
  return att;
}

ForwardTrace score_pair(const InstanceFeatures& inst, const ModelParams& params,
                        const FeatureContext& ctx) {
  ForwardTrace tr;
  tr.query = inst.query;
  tr.label = inst.label;
  if (inst.paths.empty()) return tr;
  tr.no_evidence = false;
  tr.paths.reserve(inst.paths.size());
  std::vector<Vector> pis;
  pis.reserve(inst.paths.size());
  for (const auto& path : inst.paths) {
    tr.paths.push_back(params.kind == ModelKind::entity_text_rnn
                           ? trace_path_A(path, params, ctx)
                           : trace_path_B(path, params, ctx));
    pis.push_back(tr.paths.back().pi);
  }
  const auto query = params.query_vector(inst.query);
  tr.attention = attend(pis, query, params.attention);
  tr.logit = tr.attention.ep.dot(query);
  tr.probability = std::clamp(sigmoid(tr.logit), kProbabilityEpsilon,
                              1.0 - kProbabilityEpsilon);
  return tr;
}

double instance_nll(const ForwardTrace& trace) {
  return trace.label == Label::positive ? -std::log(trace.probability)
                                        : -std::log(1.0 - trace.probability);
}

// ---------------------------------------------------------------------------
// Regularization

namespace {

struct TouchedColumns {
  std::vector<Eigen::Index> relation;
  std::vector<Eigen::Index> query;
  std::vector<Eigen::Index> type;
};

void sort_unique(std::vector<Eigen::Index>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

TouchedColumns touched_columns(const ModelParams& params,
                               std::span<const InstanceFeatures> batch,
                               const FeatureContext& ctx) {
  TouchedColumns t;
  for (const auto& inst : batch) {
    if (inst.paths.empty()) continue;
    if (params.hp.share_query_embeddings) {
      t.relation.push_back(index(inst.query));
    } else {
      t.query.push_back(index(inst.query));
    }
    if (params.kind != ModelKind::entity_text_rnn) continue;
    for (const auto& path : inst.paths) {
      for (const auto r : path.relations) t.relation.push_back(index(r));
      for (const auto e : path.entities) {
        const auto types = ctx.graph().entity_types(e);
        if (types.empty()) {
          t.type.push_back(params.type_count);
        } else {
          for (const auto ty : types) t.type.push_back(ty);
        }
      }
    }
  }
  sort_unique(t.relation);
  sort_unique(t.query);
  sort_unique(t.type);
  return t;
}

// Visits (value tensor, gradient tensor, optional touched column list) for
// every regularized tensor.
template <typename Fn>
void for_each_regularized(const ModelParams& params, ModelParams* grad,
                          const TouchedColumns& touched, Fn&& fn) {
  const auto dense = [&](const Matrix& v, Matrix* g) {
    if (v.size() > 0) fn(v, g, static_cast<const std::vector<Eigen::Index>*>(nullptr));
  };
  const auto table = [&](const Matrix& v, Matrix* g, const std::vector<Eigen::Index>& cols) {
    if (v.size() > 0 && params.hp.l2_embeddings) fn(v, g, &cols);
  };
  table(params.relation, grad ? &grad->relation : nullptr, touched.relation);
  table(params.query, grad ? &grad->query : nullptr, touched.query);
  table(params.type, grad ? &grad->type : nullptr, touched.type);
  dense(params.dummy, grad ? &grad->dummy : nullptr);
  dense(params.w_hidden, grad ? &grad->w_hidden : nullptr);
  dense(params.w_relation, grad ? &grad->w_relation : nullptr);
  dense(params.w_entity, grad ? &grad->w_entity : nullptr);
  dense(params.attention, grad ? &grad->attention : nullptr);
  dense(params.projection, grad ? &grad->projection : nullptr);
  dense(params.bias, grad ? &grad->bias : nullptr);
}

}  // namespace

double l2_penalty(const ModelParams& params, std::span<const InstanceFeatures> batch,
                  const FeatureContext& ctx) {
  if (params.hp.lambda == 0.0) return 0.0;
  const auto touched = touched_columns(params, batch, ctx);
  double sum = 0.0;
  for_each_regularized(params, nullptr, touched,
                       [&](const Matrix& v, Matrix*, const std::vector<Eigen::Index>* cols) {
                         if (cols == nullptr) {
                           sum += v.squaredNorm();
                         } else {
                           for (const auto c : *cols) sum += v.col(c).squaredNorm();
                         }
                       });
  return params.hp.lambda * sum;
}

void add_l2_gradient(const ModelParams& params, std::span<const InstanceFeatures> batch,
                     const FeatureContext& ctx, ModelParams& grad) {
  if (params.hp.lambda == 0.0) return;
  const double scale = 2.0 * params.hp.lambda;
  const auto touched = touched_columns(params, batch, ctx);
  for_each_regularized(params, &grad, touched,
                       [&](const Matrix& v, Matrix* g, const std::vector<Eigen::Index>* cols) {
                         if (cols == nullptr) {
                           *g += scale * v;
                         } else {
                           for (const auto c : *cols) g->col(c) += scale * v.col(c);
                         }
                       });
}

double loss_batch(std::span<const ForwardTrace> traces, const ModelParams& params,
                  std::span<const InstanceFeatures> batch, const FeatureContext& ctx) {
  double nll = 0.0;
  for (const auto& tr : traces) nll += instance_nll(tr);
  return nll + l2_penalty(params, batch, ctx);
}

// ---------------------------------------------------------------------------
// Backward

void backprop(const ForwardTrace& trace, const InstanceFeatures& inst,
              const ModelParams& params, const FeatureContext& ctx, ModelParams& grad) {
  if (trace.no_evidence) return;
  const double p = trace.probability;
  // The clamp is flat outside (eps, 1 - eps).
  const bool clamped = p <= kProbabilityEpsilon || p >= 1.0 - kProbabilityEpsilon;
  const double y = trace.label == Label::positive ? 1.0 : 0.0;
  const double dlogit = clamped ? 0.0 : p - y;
  if (dlogit == 0.0) return;

  const auto query = params.query_vector(inst.query);
  auto query_grad = [&]() {
    return params.hp.share_query_embeddings ? grad.relation.col(index(inst.query))
                                            : grad.query.col(index(inst.query));
  };

  const auto& att = trace.attention;
  const auto n = static_cast<Eigen::Index>(trace.paths.size());

  // logit = ep . delta
  query_grad() += dlogit * att.ep;
  const Vector dep = dlogit * query;
  // ep = tanh(s), s = sum_i alpha_i pi_i
  const Vector ds = dep.cwiseProduct((1.0 - att.ep.array().square()).matrix());

  Vector dalpha(n);
  std::vector<Vector> dpi(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pi = trace.paths[static_cast<std::size_t>(i)].pi;
    dpi[static_cast<std::size_t>(i)] = att.alpha(i) * ds;
    dalpha(i) = ds.dot(pi);
  }
  // softmax
  const double mean = att.alpha.dot(dalpha);
  const Vector dz = att.alpha.cwiseProduct((dalpha.array() - mean).matrix());
  // z_i = tanh(T^T pi_i) . delta
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& match = att.match[static_cast<std::size_t>(i)];
    const auto& pi = trace.paths[static_cast<std::size_t>(i)].pi;
    query_grad() += dz(i) * match;
    const Vector du =
        (dz(i) * query).cwiseProduct((1.0 - match.array().square()).matrix());
    grad.attention.noalias() += pi * du.transpose();
    dpi[static_cast<std::size_t>(i)].noalias() += params.attention * du;
  }

  const auto m = static_cast<Eigen::Index>(params.hp.m);
  for (std::size_t i = 0; i < trace.paths.size(); ++i) {
    const auto& pt = trace.paths[i];
    const auto& path = inst.paths[i];
    if (params.kind == ModelKind::path_text) {
      grad.projection.noalias() +=
          dpi[i] * as_vector(ctx.statement_text(path.statement_key)).transpose();
      grad.bias.col(0) += dpi[i];
      continue;
    }
    const std::size_t L = path.relations.size();
    Vector dh = dpi[i];
    for (std::size_t step = L + 1; step-- > 0;) {
      const Vector da =
          dh.cwiseProduct((pt.pre[step].array() > 0.0).cast<double>().matrix());
      grad.w_hidden.noalias() += da * pt.hidden[step].transpose();
      grad.w_entity.noalias() += da * pt.entities[step].transpose();
      const Vector drel = params.w_relation.transpose() * da;
      if (step < L) {
        grad.w_relation.noalias() +=
            da * params.relation.col(index(path.relations[step])).transpose();
        grad.relation.col(index(path.relations[step])) += drel;
      } else {
        grad.w_relation.noalias() += da * params.dummy.col(0).transpose();
        grad.dummy.col(0) += drel;
      }
      const Vector dtype = params.w_entity.leftCols(m).transpose() * da;
      const auto types = ctx.graph().entity_types(path.entities[step]);
      if (types.empty()) {
        grad.type.col(params.type_count) += dtype;
      } else {
        const double share = 1.0 / static_cast<double>(types.size());
        for (const auto t : types) grad.type.col(t) += share * dtype;
      }
      dh = params.w_hidden.transpose() * da;
    }
  }
}

namespace {

void add_into(ModelParams& dst, const ModelParams& src) {
  std::vector<const Matrix*> from;
  src.for_each([&](std::string_view, const Matrix& t) { from.push_back(&t); });
  std::size_t k = 0;
  dst.for_each([&](std::string_view, Matrix& t) { t += *from[k++]; });
}

}  // namespace

BatchGradient grad_batch(std::span<const InstanceFeatures> batch,
                         const ModelParams& params, const FeatureContext& ctx,
                         unsigned workers) {
  BatchGradient out{params.zeros_like(), 0.0};
  std::vector<double> losses(batch.size(), 0.0);
  if (workers <= 1) {
    ModelParams scratch = params.zeros_like();
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto tr = score_pair(batch[i], params, ctx);
      losses[i] = instance_nll(tr);
      scratch.for_each([](std::string_view, Matrix& t) { t.setZero(); });
      backprop(tr, batch[i], params, ctx, scratch);
      add_into(out.grad, scratch);
    }
  } else {
    std::vector<ModelParams> grads(batch.size());
    parallel_for(batch.size(), workers, [&](std::size_t i) {
      const auto tr = score_pair(batch[i], params, ctx);
      losses[i] = instance_nll(tr);
      grads[i] = params.zeros_like();
      backprop(tr, batch[i], params, ctx, grads[i]);
    });
    for (const auto& g : grads) add_into(out.grad, g);
  }
  for (const double l : losses) out.loss += l;
  out.loss += l2_penalty(params, batch, ctx);
  add_l2_gradient(params, batch, ctx, out.grad);
  return out;
}

}  // namespace pathkg
