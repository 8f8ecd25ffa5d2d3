#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "pathkg/model.hpp"

namespace gradcheck {

inline double objective(std::span<const pathkg::InstanceFeatures> batch,
                        const pathkg::ModelParams& params, const pathkg::FeatureContext& ctx) {
  std::vector<pathkg::ForwardTrace> traces;
  for (const auto& inst : batch) traces.push_back(pathkg::score_pair(inst, params, ctx));
  return pathkg::loss_batch(traces, params, batch, ctx);
}

// Signs of every RNN pre-activation; a central difference that moves one of
// them across zero straddles a kink and is not comparable.
inline std::vector<bool> relu_pattern(std::span<const pathkg::InstanceFeatures> batch,
                                      const pathkg::ModelParams& params,
                                      const pathkg::FeatureContext& ctx) {
  std::vector<bool> out;
  for (const auto& inst : batch) {
    const auto tr = pathkg::score_pair(inst, params, ctx);
    for (const auto& p : tr.paths) {
      for (const auto& a : p.pre) {
        for (Eigen::Index i = 0; i < a.size(); ++i) out.push_back(a(i) > 0.0);
      }
    }
  }
  return out;
}

struct Result {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

inline constexpr double kStep = 1e-3;
inline constexpr double kFloor = 1e-4;

// Compares grad_batch against central differences on every parameter entry.
// Relative error is |a - n| / max(|a|, |n|, kFloor).
inline Result check(std::span<const pathkg::InstanceFeatures> batch,
                    const pathkg::ModelParams& params, const pathkg::FeatureContext& ctx) {
  const auto analytic = pathkg::grad_batch(batch, params, ctx);
  const auto base_pattern = relu_pattern(batch, params, ctx);
  std::vector<const pathkg::Matrix*> grads;
  analytic.grad.for_each([&](std::string_view, const pathkg::Matrix& g) { grads.push_back(&g); });

  Result r;
  pathkg::ModelParams probe = params;
  std::vector<pathkg::Matrix*> tensors;
  probe.for_each([&](std::string_view, pathkg::Matrix& t) { tensors.push_back(&t); });
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    auto& t = *tensors[k];
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const double keep = t.data()[i];
      t.data()[i] = keep + kStep;
      const double up = objective(batch, probe, ctx);
      const bool same_up = relu_pattern(batch, probe, ctx) == base_pattern;
      t.data()[i] = keep - kStep;
      const double down = objective(batch, probe, ctx);
      const bool same_down = relu_pattern(batch, probe, ctx) == base_pattern;
      t.data()[i] = keep;
      if (!same_up || !same_down) {
        ++r.skipped;
        continue;
      }
      const double numeric = (up - down) / (2.0 * kStep);
      const double a = grads[k]->data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), kFloor});
      r.max_rel_error = std::max(r.max_rel_error, std::abs(a - numeric) / denom);
      ++r.checked;
    }
  }
  return r;
}

}  // namespace gradcheck
