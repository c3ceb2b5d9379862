#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metaug/config.hpp"
#include "metaug/csv.hpp"
#include "metaug/keel.hpp"
#include "metaug/meta.hpp"
#include "metaug/metrics.hpp"
#include "metaug/optim.hpp"
#include "metaug/preprocess.hpp"
#include "metaug/resampling.hpp"
#include "metaug/split.hpp"

namespace metaug {

enum class Method { Ce, Rs, Smote, Focal, ExplicitGradient, Potential };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct ModelConfig {
    std::vector<std::size_t> hidden{128, 16};
    Activation activation = Activation::Relu;
    double lr = 1e-3;
    double beta1 = 0.5;
    double beta2 = 0.999;
    std::size_t batch_size = 128;
    std::size_t epochs = 200;
};

struct GridSpec {
    bool enabled = false;
    std::vector<std::size_t> layers{1, 2, 3};
    std::vector<std::size_t> widths{16, 32, 64, 128};
    std::vector<double> lrs{1e-1, 1e-2, 1e-3};
};

struct ExperimentConfig {
    std::string name;  // defaults to the dataset file stem
    std::string dataset_path;
    std::string format = "keel";  // keel | csv
    CsvSchemaSpec csv;
    std::vector<Method> methods{Method::Ce};
    std::optional<double> ir_target;
    std::size_t folds = 4;  // 1 = single 64/16/20 split
    std::uint64_t seed = 17;
    std::optional<std::size_t> pca_dim;
    std::size_t smote_k = 5;
    ModelConfig model;
    MetaConfig meta;
    GridSpec grid;
    std::string out_dir = "out";
};

// [experiment]/[model]/[meta]/[grid]/[csv] sections; unspecified keys keep
// their defaults.
ExperimentConfig experiment_from_config(const ConfigFile& file);

struct FoldPlan {
    SplitIndices split;  // raw-row indices
    std::vector<std::size_t> withheld;  // raw-row indices of dropped minority
};

// Induction (optional) followed by splitting; shared by every method so all
// of them see identical folds.
std::vector<FoldPlan> plan_folds(const ExperimentConfig& cfg, const RawDataset& raw);

struct RunResult {
    MetricReport report;
    PrCurve curve;
    std::vector<double> train_loss_history;
    MetaState meta_state;   // explicit_gradient only
    SyntheticSet synth_init;
    bool has_meta = false;
};

RunResult run_fold(const ExperimentConfig& cfg, const RawDataset& raw, Method method,
                   const FoldPlan& plan, int fold_id, const MlpArchitecture& arch, double lr);

struct ExperimentOutcome {
    std::string dataset;
    double realized_ir = 0.0;
    MlpArchitecture arch;
    double lr = 0.0;
    std::vector<RunResult> runs;           // methods x folds, fold-major per method
    std::vector<MetricReport> aggregates;  // one per method (mean over folds)
};

ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

struct GridResult {
    MlpArchitecture arch;
    double lr = 0.0;
    double valid_ap = 0.0;
};

// Exhaustive search over layers x widths x lrs, scored by validation AP of a
// CE model on the first fold; ties prefer fewer parameters, then lower lr.
GridResult grid_search(const ExperimentConfig& cfg, const RawDataset& raw,
                       const std::vector<FoldPlan>& folds);

MetricReport aggregate_reports(const std::vector<MetricReport>& folds);

}  // namespace metaug
