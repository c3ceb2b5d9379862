#include "metaug/optim.hpp"

#include <cmath>

#include "metaug/error.hpp"
#include "metaug/rng.hpp"

namespace metaug {

Optimizer::Optimizer(const OptimizerConfig& cfg, const ParamSet& shape) : cfg_(cfg) {
    if (cfg.kind == OptKind::Adam) {
        for (const Tensor& w : shape.weights) {
            m_w_.push_back(Tensor::zeros(w.rows(), w.cols()));
            v_w_.push_back(Tensor::zeros(w.rows(), w.cols()));
        }
        for (const Tensor& b : shape.biases) {
            m_b_.push_back(Tensor::zeros(b.rows(), b.cols()));
            v_b_.push_back(Tensor::zeros(b.rows(), b.cols()));
        }
    }
}

void Optimizer::apply(Tensor& p, const Tensor& g, Tensor& m, Tensor& v, double bias1,
                      double bias2) {
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        m.values[i] = cfg_.beta1 * m.values[i] + (1.0 - cfg_.beta1) * g.values[i];
        v.values[i] = cfg_.beta2 * v.values[i] + (1.0 - cfg_.beta2) * g.values[i] * g.values[i];
        const double mhat = m.values[i] / bias1;
        const double vhat = v.values[i] / bias2;
        p.values[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
}

void Optimizer::step(ParamSet& params, const std::vector<Tensor>& grad_w,
                     const std::vector<Tensor>& grad_b) {
    if (grad_w.size() != params.weights.size() || grad_b.size() != params.biases.size())
        throw Error("optimizer: gradient list size mismatch");
    if (cfg_.kind == OptKind::Sgd) {
        for (std::size_t l = 0; l < params.weights.size(); ++l) {
            axpy(params.weights[l], grad_w[l], -cfg_.lr);
            axpy(params.biases[l], grad_b[l], -cfg_.lr);
        }
        return;
    }
    ++t_;
    const double bias1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bias2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        apply(params.weights[l], grad_w[l], m_w_[l], v_w_[l], bias1, bias2);
        apply(params.biases[l], grad_b[l], m_b_[l], v_b_[l], bias1, bias2);
    }
}

namespace {

std::vector<std::vector<std::size_t>> default_batches(std::size_t n, std::size_t batch_size,
                                                      Rng& rng) {
    std::vector<std::size_t> perm = rng.permutation(n);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t end = std::min(n, start + batch_size);
        batches.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                             perm.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

}  // namespace

TrainResult train(const ParamSet& init, const Tensor& X, const Tensor& targets,
                  const TrainOptions& opts) {
    if (X.rows() == 0) throw Error("train: empty dataset");
    if (X.rows() != targets.rows())
        throw ShapeError("train: X rows != target rows");
    if (opts.batch_size == 0) throw Error("train: batch_size must be >= 1");

    TrainResult result;
    result.params = init;
    Optimizer opt(opts.optimizer, init);
    Rng shuffle_rng(child_seed(opts.seed, "train.shuffle"));

    for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
        const auto batches = opts.sampler ? opts.sampler(epoch)
                                          : default_batches(X.rows(), opts.batch_size, shuffle_rng);
        double loss_sum = 0.0;
        std::size_t sample_count = 0;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            const auto& idx = batches[b];
            if (idx.empty()) continue;
            Graph g;
            MlpNodes net;
            VarId loss_node;
            try {
                net = mlp_forward(g, result.params, g.constant(X.gather_rows(idx)), true);
                loss_node = build_loss(g, opts.loss, net.output, g.constant(targets.gather_rows(idx)));
            } catch (const NumericError& e) {
                throw NumericError("train: " + std::string(e.what()) + " at epoch " +
                                   std::to_string(epoch) + ", batch " + std::to_string(b));
            }
            const double loss_value = g.value(loss_node).item();
            std::vector<VarId> wrt;
            for (VarId w : net.weights) wrt.push_back(w);
            for (VarId bnode : net.biases) wrt.push_back(bnode);
            std::vector<Tensor> grads;
            try {
                grads = g.backward(loss_node, wrt);
            } catch (const NumericError& e) {
                throw NumericError("train: " + std::string(e.what()) + " at epoch " +
                                   std::to_string(epoch) + ", batch " + std::to_string(b));
            }
            const std::size_t layers = result.params.layer_count();
            std::vector<Tensor> gw(grads.begin(), grads.begin() + static_cast<std::ptrdiff_t>(layers));
            std::vector<Tensor> gb(grads.begin() + static_cast<std::ptrdiff_t>(layers), grads.end());
            opt.step(result.params, gw, gb);
            loss_sum += loss_value * static_cast<double>(idx.size());
            sample_count += idx.size();
        }
        result.epoch_loss.push_back(sample_count ? loss_sum / static_cast<double>(sample_count)
                                                 : 0.0);
    }
    return result;
}

double eval_loss(const ParamSet& params, const Tensor& X, const Tensor& targets,
                 const LossSpec& spec) {
    Graph g;
    MlpNodes net = mlp_forward(g, params, g.constant(X), false);
    VarId loss = build_loss(g, spec, net.output, g.constant(targets));
    return g.value(loss).item();
}

}  // namespace metaug
