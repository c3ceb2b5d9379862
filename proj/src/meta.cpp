#include "metaug/meta.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "metaug/error.hpp"
#include "metaug/optim.hpp"

namespace metaug {

CyclingBatches::CyclingBatches(std::size_t n, std::size_t batch_size, std::uint64_t seed)
    : batch_size_(std::min(std::max<std::size_t>(batch_size, 1), std::max<std::size_t>(n, 1))),
      rng_(seed) {
    if (n == 0) throw Error("cycling batches: empty index range");
    perm_ = rng_.permutation(n);
}

std::size_t CyclingBatches::batches_per_epoch() const {
    return (perm_.size() + batch_size_ - 1) / batch_size_;
}

std::vector<std::size_t> CyclingBatches::next() {
    const std::size_t take = std::min(batch_size_, perm_.size() - pos_);
    std::vector<std::size_t> batch(perm_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                   perm_.begin() + static_cast<std::ptrdiff_t>(pos_ + take));
    pos_ += take;
    if (pos_ == perm_.size()) {
        rng_.shuffle(perm_);
        pos_ = 0;
    }
    return batch;
}

AdaptedParams adapt_step(Graph& g, const ParamSet& theta, VarId inputs, VarId targets,
                         const LossSpec& loss, double eta1, std::size_t inner_steps) {
    if (inner_steps == 0) throw Error("adapt_step: inner_steps must be >= 1");
    MlpNodes net = mlp_forward(g, theta, inputs, true);

    AdaptedParams out;
    out.weights = net.weights;
    out.biases = net.biases;
    const std::size_t layers = theta.layer_count();
    for (std::size_t step = 0; step < inner_steps; ++step) {
        VarId output = step == 0
                           ? net.output
                           : mlp_forward_with(g, theta.arch, out.weights, out.biases, inputs);
        out.inner_loss = build_loss(g, loss, output, targets);

        std::vector<VarId> wrt;
        wrt.insert(wrt.end(), out.weights.begin(), out.weights.end());
        wrt.insert(wrt.end(), out.biases.begin(), out.biases.end());
        // Retained so theta' stays differentiable wrt the synthetic rows; past
        // the first step the parameters are interior nodes.
        auto grads = g.backward_retained(out.inner_loss, wrt, step > 0);
        for (std::size_t l = 0; l < layers; ++l) {
            out.weights[l] = g.add(out.weights[l], g.scale(grads[l], -eta1));
            out.biases[l] = g.add(out.biases[l], g.scale(grads[layers + l], -eta1));
        }
    }
    return out;
}

SyntheticUpdate synthetic_update(Graph& g, VarId z_node, const AdaptedParams& adapted,
                                 const MlpArchitecture& arch, const Tensor& X_valid,
                                 const Tensor& t_valid, const LossSpec& loss, double eta2) {
    VarId preds =
        mlp_forward_with(g, arch, adapted.weights, adapted.biases, g.constant(X_valid));
    VarId valid_loss = build_loss(g, loss, preds, g.constant(t_valid));

    SyntheticUpdate out;
    out.valid_loss = g.value(valid_loss).item();
    out.z_new = g.value(z_node);
    if (eta2 == 0.0) {
        out.z_grad = Tensor::zeros(out.z_new.rows(), out.z_new.cols());
        return out;
    }
    const VarId wrt[1] = {z_node};
    out.z_grad = g.backward(valid_loss, wrt)[0];
    if (!out.z_grad.all_finite()) throw NumericError("synthetic_update: non-finite meta-gradient");
    axpy(out.z_new, out.z_grad, -eta2);
    return out;
}

namespace {

// Selection matrices splitting synthetic rows into inputs and targets keep
// both halves differentiable.
Tensor input_selector(std::size_t z_cols, std::size_t input_dim) {
    Tensor s = Tensor::zeros(z_cols, input_dim);
    for (std::size_t i = 0; i < input_dim; ++i) s.at(i, i) = 1.0;
    return s;
}

Tensor target_selector(std::size_t z_cols) {
    Tensor s = Tensor::zeros(z_cols, 1);
    s.at(z_cols - 1, 0) = 1.0;
    return s;
}

}  // namespace

MetaState meta_train(const MetaData& data, const ParamSet& theta0, const SyntheticSet& z0,
                     const MetaConfig& cfg) {
    const MlpArchitecture& arch = theta0.arch;
    if (z0.Z.rows() == 0) throw Error("meta_train: synthetic set is empty");
    const std::size_t expected_cols = arch.input_dim + (cfg.synth_has_targets ? 1 : 0);
    if (z0.Z.cols() != expected_cols)
        throw ShapeError("meta_train: synthetic rows have " + std::to_string(z0.Z.cols()) +
                         " columns, expected " + std::to_string(expected_cols));
    if (data.X_train.rows() == 0 || data.X_valid.rows() == 0)
        throw Error("meta_train: train and valid sets must be nonempty");

    MetaState state;
    state.theta = theta0;
    state.synth = z0;

    CyclingBatches train_stream(data.X_train.rows(), cfg.train_batch,
                                child_seed(cfg.seed, "meta.train"));
    CyclingBatches valid_stream(data.X_valid.rows(), cfg.valid_batch,
                                child_seed(cfg.seed, "meta.valid"));
    CyclingBatches synth_stream(state.synth.Z.rows(), cfg.synth_batch,
                                child_seed(cfg.seed, "meta.synth"));
    const std::size_t iters_per_epoch =
        std::max(train_stream.batches_per_epoch(), synth_stream.batches_per_epoch());

    auto synth_eval_loss = [&]() {
        if (!cfg.synth_has_targets) {
            return eval_loss(state.theta, state.synth.Z,
                             Tensor::full(state.synth.Z.rows(), 1, 1.0), cfg.loss);
        }
        Tensor zx(state.synth.Z.rows(), arch.input_dim);
        Tensor zy(state.synth.Z.rows(), 1);
        for (std::size_t r = 0; r < state.synth.Z.rows(); ++r) {
            for (std::size_t c = 0; c < arch.input_dim; ++c) zx.at(r, c) = state.synth.Z.at(r, c);
            zy.at(r, 0) = state.synth.Z.at(r, arch.input_dim);
        }
        return eval_loss(state.theta, zx, zy, cfg.loss);
    };

    // Divergence baseline: validation loss of theta0 before any meta update,
    // floored so near-perfect pretrained models do not trip the guard on
    // noise.
    const double v0 =
        std::max(eval_loss(theta0, data.X_valid, data.t_valid, cfg.loss), cfg.divergence_floor);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const Tensor z_epoch_start = state.synth.Z;
        double valid_sum = 0.0, inner_sum = 0.0;
        for (std::size_t iter = 0; iter < iters_per_epoch; ++iter) {
            const auto bi_tr = train_stream.next();
            const auto bi_va = valid_stream.next();
            const auto bi_z = synth_stream.next();
            try {
                Graph g;
                VarId z = g.variable(state.synth.Z.gather_rows(bi_z));

                VarId z_inputs, z_targets;
                if (cfg.synth_has_targets) {
                    z_inputs = g.matmul(z, g.constant(input_selector(expected_cols, arch.input_dim)));
                    z_targets = g.matmul(z, g.constant(target_selector(expected_cols)));
                } else {
                    z_inputs = z;
                    z_targets = g.constant(Tensor::full(bi_z.size(), 1, 1.0));
                }

                VarId inner_inputs = z_inputs, inner_targets = z_targets;
                if (cfg.include_real_in_inner) {
                    inner_inputs =
                        g.concat_rows(g.constant(data.X_train.gather_rows(bi_tr)), z_inputs);
                    inner_targets =
                        g.concat_rows(g.constant(data.t_train.gather_rows(bi_tr)), z_targets);
                }

                AdaptedParams adapted = adapt_step(g, state.theta, inner_inputs, inner_targets,
                                                   cfg.loss, cfg.eta1, cfg.inner_steps);
                SyntheticUpdate update = synthetic_update(
                    g, z, adapted, arch, data.X_valid.gather_rows(bi_va),
                    data.t_valid.gather_rows(bi_va), cfg.loss, cfg.eta2);

                if (cfg.eta2 != 0.0)
                    for (std::size_t r = 0; r < bi_z.size(); ++r)
                        for (std::size_t c = 0; c < expected_cols; ++c)
                            state.synth.Z.at(bi_z[r], c) = update.z_new.at(r, c);

                for (std::size_t l = 0; l < state.theta.layer_count(); ++l) {
                    state.theta.weights[l] = g.value(adapted.weights[l]);
                    state.theta.biases[l] = g.value(adapted.biases[l]);
                }
                valid_sum += update.valid_loss;
                inner_sum += g.value(adapted.inner_loss).item();
            } catch (const NumericError& e) {
                throw NumericError("meta_train: " + std::string(e.what()) + " at epoch " +
                                   std::to_string(epoch) + ", iteration " + std::to_string(iter));
            }
        }
        const double epoch_valid = valid_sum / static_cast<double>(iters_per_epoch);
        state.valid_loss.push_back(epoch_valid);
        state.train_loss.push_back(inner_sum / static_cast<double>(iters_per_epoch));
        state.synth_loss.push_back(synth_eval_loss());
        Tensor shift = state.synth.Z;
        axpy(shift, z_epoch_start, -1.0);
        state.z_shift.push_back(frobenius_norm(shift));
        state.epochs_run = epoch + 1;

        if (epoch_valid > 10.0 * v0) {
            throw NumericError("meta_train: validation loss diverged at epoch " +
                               std::to_string(epoch) + " (" + std::to_string(epoch_valid) +
                               " vs initial " + std::to_string(v0) + ")");
        }
    }
    return state;
}

std::string convergence_csv(const MetaState& state) {
    std::ostringstream out;
    out << "epoch,valid_loss,synth_loss,train_loss,z_shift\n";
    out.precision(12);
    for (std::size_t e = 0; e < state.epochs_run; ++e)
        out << e << ',' << state.valid_loss[e] << ',' << state.synth_loss[e] << ','
            << state.train_loss[e] << ',' << state.z_shift[e] << '\n';
    return out.str();
}

}  // namespace metaug
