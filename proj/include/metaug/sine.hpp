#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metaug/meta.hpp"

namespace metaug {

// Imbalanced sine regression: a handful of on-curve samples, plus freely
// optimizable synthetic (x, y) points.
struct SineTask {
    double amplitude = 1.0;
    double frequency = 1.5707963267948966;  // pi/2
    double phase = 0.0;
    std::size_t k1 = 5;  // train points
    std::size_t k2 = 5;  // held-out points
    double domain_lo = -5.0;
    double domain_hi = 5.0;
    std::size_t n_synth = 20;
    double synth_lo = -1.0;  // synthetic points sampled in [lo, hi]^2
    double synth_hi = 1.0;
    std::size_t grid_points = 200;
    std::uint64_t seed = 0;

    double truth(double x) const;
};

struct SineData {
    Tensor train_x, train_y;
    Tensor valid_x, valid_y;
    Tensor synth;  // n_synth x 2 rows of (x, y)
    Tensor grid_x, grid_y;
};

SineData generate_sine_task(const SineTask& task);

struct SineReport {
    double baseline_mse = 0.0;    // trained on train u valid
    double pretrained_mse = 0.0;  // trained on train only
    double meta_mse = 0.0;        // after meta-training with synthetic points
    Tensor synth_init;
    Tensor synth_final;
    double synth_dist_init = 0.0;   // mean |y - sin| over synthetic points
    double synth_dist_final = 0.0;
    MetaState meta_state;
    ParamSet baseline_params, pretrained_params;
};

struct SineExperimentConfig {
    SineTask task;
    double eta1 = 0.1;
    double eta2 = 1.0;
    std::size_t meta_epochs = 200;
    std::size_t synth_batch = 10;
    std::size_t pretrain_epochs = 300;
    double pretrain_lr = 1e-2;
};

SineReport run_sine_experiment(const SineExperimentConfig& cfg);

// Plot table: x, y, role in {train, valid, synth_init, synth_final,
// model_curve, true_curve, baseline_curve, pretrained_curve}.
std::string sine_points_csv(const SineReport& report, const SineData& data);

}  // namespace metaug
