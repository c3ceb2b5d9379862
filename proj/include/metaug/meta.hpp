#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metaug/losses.hpp"
#include "metaug/mlp.hpp"
#include "metaug/resampling.hpp"
#include "metaug/rng.hpp"

namespace metaug {

struct MetaConfig {
    double eta1 = 1e-2;  // inner (adaptation) step size
    double eta2 = 10.0;  // synthetic-point step size
    std::size_t inner_steps = 1;
    double confidence_bound = 1.0;
    std::size_t epochs = 50;
    std::size_t train_batch = 128;
    std::size_t valid_batch = 128;
    std::size_t synth_batch = 64;
    bool include_real_in_inner = true;  // inner loss on X1 u Z, not Z alone
    // When set, each synthetic row is (input..., target) and the target
    // coordinate is itself optimized (the sine demo); otherwise rows are
    // inputs with fixed label 1.
    bool synth_has_targets = false;
    std::uint64_t seed = 0;
    LossSpec loss;
    // Floor for the divergence baseline (the guard aborts when an epoch's
    // validation loss exceeds 10x max(baseline, floor)). Default is sized for
    // BCE; MSE tasks should raise it to their loss scale.
    double divergence_floor = 0.05;
};

struct MetaState {
    ParamSet theta;
    SyntheticSet synth;
    std::vector<double> valid_loss;  // per-epoch mean loss of the adapted classifier
    std::vector<double> synth_loss;  // per-epoch loss on the synthetic points alone
    std::vector<double> train_loss;  // per-epoch mean inner loss
    std::vector<double> z_shift;     // per-epoch Frobenius norm of the Z displacement
    std::size_t epochs_run = 0;
};

// Shuffled index chunks that reshuffle when exhausted, so batch streams can
// cycle past an epoch boundary.
class CyclingBatches {
public:
    CyclingBatches(std::size_t n, std::size_t batch_size, std::uint64_t seed);
    std::vector<std::size_t> next();
    std::size_t batches_per_epoch() const;

private:
    std::size_t batch_size_;
    std::vector<std::size_t> perm_;
    std::size_t pos_ = 0;
    Rng rng_;
};

struct AdaptedParams {
    std::vector<VarId> weights;
    std::vector<VarId> biases;
    VarId inner_loss;  // loss of the final inner step
};

// One or more first-order updates theta' = theta - eta1 * grad L(batch),
// with the gradients retained in the graph so theta' stays differentiable
// wrt everything the batch depends on (in particular the synthetic rows).
AdaptedParams adapt_step(Graph& g, const ParamSet& theta, VarId inputs, VarId targets,
                         const LossSpec& loss, double eta1, std::size_t inner_steps = 1);

struct SyntheticUpdate {
    Tensor z_new;
    Tensor z_grad;  // dL(valid; theta'(Z)) / dZ
    double valid_loss;
};

// Gradient-through-gradient step on the synthetic rows: evaluates the
// validation loss under the adapted parameters and differentiates it back to
// z_node through the retained adaptation.
SyntheticUpdate synthetic_update(Graph& g, VarId z_node, const AdaptedParams& adapted,
                                 const MlpArchitecture& arch, const Tensor& X_valid,
                                 const Tensor& t_valid, const LossSpec& loss, double eta2);

struct MetaData {
    Tensor X_train;
    Tensor t_train;
    Tensor X_valid;
    Tensor t_valid;
};

// The full two-step meta loop over cycling (X1, X2, Z) batches. The adapted
// parameters are committed as the new theta every iteration; Z rows move by
// eta2 times the meta-gradient. Aborts when the per-epoch validation loss
// exceeds 10x the (floored) pre-meta validation loss of theta0.
MetaState meta_train(const MetaData& data, const ParamSet& theta0, const SyntheticSet& z0,
                     const MetaConfig& cfg);

// Per-epoch diagnostics as CSV (epoch, valid_loss, synth_loss, train_loss,
// z_shift).
std::string convergence_csv(const MetaState& state);

}  // namespace metaug
