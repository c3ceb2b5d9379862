#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "metaug/losses.hpp"
#include "metaug/mlp.hpp"

namespace metaug {

enum class OptKind { Sgd, Adam };

struct OptimizerConfig {
    OptKind kind = OptKind::Adam;
    double lr = 1e-3;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Optimizer {
public:
    Optimizer(const OptimizerConfig& cfg, const ParamSet& shape);
    void step(ParamSet& params, const std::vector<Tensor>& grad_w,
              const std::vector<Tensor>& grad_b);

private:
    OptimizerConfig cfg_;
    std::vector<Tensor> m_w_, v_w_, m_b_, v_b_;
    std::size_t t_ = 0;

    void apply(Tensor& p, const Tensor& g, Tensor& m, Tensor& v, double bias1, double bias2);
};

// A batch schedule: index batches for one epoch. The default shuffles a full
// permutation each epoch and keeps the last short batch.
using BatchSampler = std::function<std::vector<std::vector<std::size_t>>(std::size_t epoch)>;

struct TrainOptions {
    LossSpec loss;
    OptimizerConfig optimizer;
    std::size_t batch_size = 128;
    std::size_t epochs = 200;
    std::uint64_t seed = 0;
    BatchSampler sampler;  // optional override
};

struct TrainResult {
    ParamSet params;
    std::vector<double> epoch_loss;  // per-epoch mean loss, sample weighted
};

// Mini-batch training; deterministic given seed. A non-finite loss aborts with
// the epoch and batch index in the message.
TrainResult train(const ParamSet& init, const Tensor& X, const Tensor& targets,
                  const TrainOptions& opts);

// Loss of the model on (X, targets) without touching parameters.
double eval_loss(const ParamSet& params, const Tensor& X, const Tensor& targets,
                 const LossSpec& spec);

}  // namespace metaug
