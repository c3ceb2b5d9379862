#include "metaug/losses.hpp"

#include "metaug/error.hpp"

namespace metaug {

namespace {

constexpr double kProbEps = 1e-12;

void check_binary_labels(const Tensor& y) {
    for (double v : y.values)
        if (v != 0.0 && v != 1.0)
            throw Error("loss: labels must be 0 or 1");
}

// Smooth squeeze of probabilities into [eps, 1-eps] so saturated outputs
// cannot reach log(0).
VarId squeeze_probs(Graph& g, VarId probs) {
    return g.affine(probs, 1.0 - 2.0 * kProbEps, kProbEps);
}

}  // namespace

VarId loss_bce(Graph& g, VarId probs, VarId labels, const Tensor* weights) {
    {
        const Tensor& p = g.value(probs);
        const Tensor& y = g.value(labels);
        if (!p.same_shape(y))
            throw ShapeError("loss_bce: probs " + p.shape_str() + " vs labels " + y.shape_str());
        check_binary_labels(y);
        if (weights && !weights->same_shape(p))
            throw ShapeError("loss_bce: weights " + weights->shape_str() + " vs probs " +
                             p.shape_str());
    }
    double wsum = 0.0;
    if (weights) {
        for (double w : weights->values) {
            if (w < 0.0) throw Error("loss_bce: negative sample weight");
            wsum += w;
        }
        if (wsum <= 0.0) throw Error("loss_bce: weight sum must be positive");
    }

    VarId ps = squeeze_probs(g, probs);
    VarId log_p = g.log(ps);
    VarId log_1mp = g.log(g.affine(ps, -1.0, 1.0));
    VarId one_minus_y = g.affine(labels, -1.0, 1.0);
    VarId term = g.add(g.mul(labels, log_p), g.mul(one_minus_y, log_1mp));

    if (!weights) return g.scale(g.mean(term), -1.0);
    VarId weighted = g.mul(term, g.constant(*weights));
    return g.scale(g.sum(weighted), -1.0 / wsum);
}

VarId loss_focal(Graph& g, VarId probs, VarId labels, double gamma, double alpha) {
    if (gamma < 0.0) throw Error("loss_focal: gamma must be >= 0");
    if (alpha < 0.0 || alpha > 1.0) throw Error("loss_focal: alpha must be in [0,1]");
    const Tensor& p = g.value(probs);
    const Tensor& y = g.value(labels);
    if (!p.same_shape(y))
        throw ShapeError("loss_focal: probs " + p.shape_str() + " vs labels " + y.shape_str());
    check_binary_labels(y);

    // p_t = p for y=1, 1-p for y=0, as the affine p*(2y-1) + (1-y).
    Tensor slope = y, offset = y, alpha_t = y;
    for (std::size_t i = 0; i < y.values.size(); ++i) {
        const double yi = y.values[i];
        slope.values[i] = 2.0 * yi - 1.0;
        offset.values[i] = 1.0 - yi;
        alpha_t.values[i] = yi == 1.0 ? alpha : 1.0 - alpha;
    }
    VarId ps = squeeze_probs(g, probs);
    VarId p_t = g.add(g.mul(ps, g.constant(slope)), g.constant(offset));
    VarId modulator = g.pow(g.affine(p_t, -1.0, 1.0), gamma);
    VarId term = g.mul(g.mul(g.constant(alpha_t), modulator), g.log(p_t));
    return g.scale(g.mean(term), -1.0);
}

VarId loss_mse(Graph& g, VarId preds, VarId targets) {
    const Tensor& p = g.value(preds);
    const Tensor& t = g.value(targets);
    if (!p.same_shape(t))
        throw ShapeError("loss_mse: preds " + p.shape_str() + " vs targets " + t.shape_str());
    VarId diff = g.add(preds, g.scale(targets, -1.0));
    return g.mean(g.mul(diff, diff));
}

VarId build_loss(Graph& g, const LossSpec& spec, VarId outputs, VarId targets) {
    switch (spec.kind) {
        case LossKind::Bce:
            return loss_bce(g, outputs, targets, spec.weights ? &*spec.weights : nullptr);
        case LossKind::Focal:
            return loss_focal(g, outputs, targets, spec.focal_gamma, spec.focal_alpha);
        case LossKind::Mse:
            return loss_mse(g, outputs, targets);
    }
    throw Error("build_loss: unknown loss kind");
}

}  // namespace metaug
