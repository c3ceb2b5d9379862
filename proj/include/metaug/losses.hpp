#pragma once

#include <optional>

#include "metaug/graph.hpp"
#include "metaug/tensor.hpp"

namespace metaug {

enum class LossKind { Bce, Focal, Mse };

struct LossSpec {
    LossKind kind = LossKind::Bce;
    double focal_gamma = 2.0;
    double focal_alpha = 0.5;
    std::optional<Tensor> weights;  // per-sample weights, BCE only
};

// Mean of -[y log p + (1-y) log(1-p)], probabilities squeezed into
// [1e-12, 1-1e-12] before the log. With weights: scaled per sample, then
// normalized by the weight sum.
VarId loss_bce(Graph& g, VarId probs, VarId labels, const Tensor* weights = nullptr);

// Mean of -alpha_t (1-p_t)^gamma log(p_t); labels are read as constants.
VarId loss_focal(Graph& g, VarId probs, VarId labels, double gamma, double alpha);

// Mean squared residual. Targets may be graph variables (the sine demo's
// synthetic y-coordinates are).
VarId loss_mse(Graph& g, VarId preds, VarId targets);

VarId build_loss(Graph& g, const LossSpec& spec, VarId outputs, VarId targets);

}  // namespace metaug
