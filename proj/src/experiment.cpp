#include "metaug/experiment.hpp"

#include <algorithm>
#include <memory>
#include <numeric>

#include "metaug/error.hpp"

namespace metaug {

const char* method_name(Method m) {
    switch (m) {
        case Method::Ce: return "ce";
        case Method::Rs: return "rs";
        case Method::Smote: return "smote";
        case Method::Focal: return "focal";
        case Method::ExplicitGradient: return "explicit_gradient";
        case Method::Potential: return "potential";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    for (Method m : {Method::Ce, Method::Rs, Method::Smote, Method::Focal,
                     Method::ExplicitGradient, Method::Potential})
        if (name == method_name(m)) return m;
    throw ConfigError("unknown method: " + name);
}

namespace {

std::string path_stem(const std::string& path) {
    std::string base = path;
    const std::size_t slash = base.find_last_of('/');
    if (slash != std::string::npos) base = base.substr(slash + 1);
    const std::size_t dot = base.find_last_of('.');
    if (dot != std::string::npos) base = base.substr(0, dot);
    return base;
}

}  // namespace

ExperimentConfig experiment_from_config(const ConfigFile& f) {
    ExperimentConfig cfg;
    cfg.dataset_path = f.get("experiment", "dataset");
    cfg.format = f.get("experiment", "format", "keel");
    cfg.name = f.get("experiment", "name", path_stem(cfg.dataset_path));
    if (f.has("experiment", "method")) {
        cfg.methods.clear();
        for (const std::string& m : f.get_list("experiment", "method"))
            cfg.methods.push_back(method_from_name(m));
    }
    if (f.has("experiment", "ir")) cfg.ir_target = f.get_double("experiment", "ir", 0.0);
    cfg.folds = static_cast<std::size_t>(f.get_int("experiment", "folds", 4));
    cfg.seed = static_cast<std::uint64_t>(f.get_int("experiment", "seed", 17));
    if (f.has("experiment", "pca_dim"))
        cfg.pca_dim = static_cast<std::size_t>(f.get_int("experiment", "pca_dim", 0));
    cfg.out_dir = f.get("experiment", "out", "out");
    cfg.smote_k = static_cast<std::size_t>(f.get_int("experiment", "smote_k", 5));

    if (f.has("model", "hidden")) {
        cfg.model.hidden.clear();
        for (const std::string& w : f.get_list("model", "hidden"))
            cfg.model.hidden.push_back(static_cast<std::size_t>(std::stoll(w)));
    }
    cfg.model.activation =
        f.get("model", "activation", "relu") == "tanh" ? Activation::Tanh : Activation::Relu;
    cfg.model.lr = f.get_double("model", "lr", 1e-3);
    cfg.model.beta1 = f.get_double("model", "beta1", 0.5);
    cfg.model.beta2 = f.get_double("model", "beta2", 0.999);
    cfg.model.batch_size = static_cast<std::size_t>(f.get_int("model", "batch_size", 128));
    cfg.model.epochs = static_cast<std::size_t>(f.get_int("model", "epochs", 200));

    cfg.meta.eta1 = f.get_double("meta", "eta1", 1e-2);
    cfg.meta.eta2 = f.get_double("meta", "eta2", 10.0);
    cfg.meta.epochs = static_cast<std::size_t>(f.get_int("meta", "epochs", 50));
    cfg.meta.inner_steps = static_cast<std::size_t>(f.get_int("meta", "inner_steps", 1));
    cfg.meta.confidence_bound = f.get_double("meta", "confidence", 1.0);
    cfg.meta.train_batch = static_cast<std::size_t>(f.get_int("meta", "train_batch", 128));
    cfg.meta.valid_batch = static_cast<std::size_t>(f.get_int("meta", "valid_batch", 128));
    cfg.meta.synth_batch = static_cast<std::size_t>(f.get_int("meta", "synth_batch", 64));
    cfg.meta.include_real_in_inner = f.get_bool("meta", "include_real", true);

    if (f.has_section("grid")) {
        cfg.grid.enabled = true;
        if (f.has("grid", "layers")) {
            cfg.grid.layers.clear();
            for (const std::string& v : f.get_list("grid", "layers"))
                cfg.grid.layers.push_back(static_cast<std::size_t>(std::stoll(v)));
        }
        if (f.has("grid", "width")) {
            cfg.grid.widths.clear();
            for (const std::string& v : f.get_list("grid", "width"))
                cfg.grid.widths.push_back(static_cast<std::size_t>(std::stoll(v)));
        }
        if (f.has("grid", "lr")) {
            cfg.grid.lrs.clear();
            for (const std::string& v : f.get_list("grid", "lr"))
                cfg.grid.lrs.push_back(std::stod(v));
        }
    }

    if (f.has_section("csv")) {
        cfg.csv.label_column = f.get("csv", "label");
        cfg.csv.positive_token = f.get("csv", "positive");
        cfg.csv.categorical_columns = f.get_list("csv", "categorical");
        cfg.csv.ignore_columns = f.get_list("csv", "ignore");
        cfg.csv.missing_token = f.get("csv", "missing", "?");
        cfg.csv.drop_missing = f.get_bool("csv", "drop_missing", true);
    }
    return cfg;
}

std::vector<FoldPlan> plan_folds(const ExperimentConfig& cfg, const RawDataset& raw) {
    std::vector<std::size_t> retained(raw.size());
    std::iota(retained.begin(), retained.end(), 0);
    std::vector<std::size_t> withheld;
    if (cfg.ir_target) {
        InducedImbalance ind =
            induce_imbalance(raw.labels, {*cfg.ir_target, child_seed(cfg.seed, "imbalance")});
        retained = ind.retained;
        withheld = ind.withheld_minority;
    }
    std::vector<int> labels;
    labels.reserve(retained.size());
    for (std::size_t i : retained) labels.push_back(raw.labels[i]);

    std::vector<FoldPlan> plans;
    if (cfg.folds <= 1) {
        SplitIndices s = stratified_split(labels, {0.64, 0.16, 0.20}, child_seed(cfg.seed, "split"));
        FoldPlan plan;
        plan.split.fold = 0;
        for (std::size_t i : s.train) plan.split.train.push_back(retained[i]);
        for (std::size_t i : s.valid) plan.split.valid.push_back(retained[i]);
        for (std::size_t i : s.test) plan.split.test.push_back(retained[i]);
        plan.withheld = withheld;
        plans.push_back(std::move(plan));
        return plans;
    }
    for (SplitIndices& s : stratified_kfold(labels, cfg.folds, child_seed(cfg.seed, "folds"), 0.25)) {
        FoldPlan plan;
        plan.split.fold = s.fold;
        for (std::size_t i : s.train) plan.split.train.push_back(retained[i]);
        for (std::size_t i : s.valid) plan.split.valid.push_back(retained[i]);
        for (std::size_t i : s.test) plan.split.test.push_back(retained[i]);
        plan.withheld = withheld;
        plans.push_back(std::move(plan));
    }
    return plans;
}

namespace {

TrainOptions base_train_options(const ExperimentConfig& cfg, double lr, std::uint64_t seed) {
    TrainOptions opts;
    opts.loss.kind = LossKind::Bce;
    opts.optimizer.kind = OptKind::Adam;
    opts.optimizer.lr = lr;
    opts.optimizer.beta1 = cfg.model.beta1;
    opts.optimizer.beta2 = cfg.model.beta2;
    opts.batch_size = cfg.model.batch_size;
    opts.epochs = cfg.model.epochs;
    opts.seed = seed;
    return opts;
}

Tensor labels_tensor(const std::vector<int>& y) {
    Tensor t(y.size(), 1);
    for (std::size_t i = 0; i < y.size(); ++i) t.values[i] = y[i];
    return t;
}

}  // namespace

RunResult run_fold(const ExperimentConfig& cfg, const RawDataset& raw, Method method,
                   const FoldPlan& plan, int fold_id, const MlpArchitecture& arch, double lr) {
    const std::uint64_t fold_seed =
        child_seed(child_seed(cfg.seed, method_name(method)), "fold", fold_id);

    ProcessedDataset pd = preprocess(raw, plan.split.train, cfg.pca_dim);

    Tensor Xtr = pd.X.gather_rows(plan.split.train);
    std::vector<int> ytr;
    for (std::size_t i : plan.split.train) ytr.push_back(pd.y[i]);
    Tensor Xva = pd.X.gather_rows(plan.split.valid);
    std::vector<int> yva;
    for (std::size_t i : plan.split.valid) yva.push_back(pd.y[i]);
    Tensor Xte = pd.X.gather_rows(plan.split.test);
    std::vector<int> yte;
    for (std::size_t i : plan.split.test) yte.push_back(pd.y[i]);

    ParamSet init = init_params(arch, child_seed(fold_seed, "init"));
    RunResult out;
    ParamSet final_params = init;

    switch (method) {
        case Method::Ce: {
            TrainOptions opts = base_train_options(cfg, lr, child_seed(fold_seed, "train"));
            TrainResult r = train(init, Xtr, labels_tensor(ytr), opts);
            final_params = std::move(r.params);
            out.train_loss_history = std::move(r.epoch_loss);
            break;
        }
        case Method::Rs: {
            TrainOptions opts = base_train_options(cfg, lr, child_seed(fold_seed, "train"));
            auto sampler = std::make_shared<BalancedBatchSampler>(
                ytr, cfg.model.batch_size % 2 ? cfg.model.batch_size + 1 : cfg.model.batch_size,
                child_seed(fold_seed, "sampler"));
            opts.sampler = [sampler](std::size_t) { return sampler->epoch_batches(); };
            TrainResult r = train(init, Xtr, labels_tensor(ytr), opts);
            final_params = std::move(r.params);
            out.train_loss_history = std::move(r.epoch_loss);
            break;
        }
        case Method::Smote: {
            std::vector<std::size_t> minority;
            for (std::size_t i = 0; i < ytr.size(); ++i)
                if (ytr[i] == 1) minority.push_back(i);
            const Tensor minority_rows = Xtr.gather_rows(minority);
            const std::size_t k = std::min(cfg.smote_k, minority.size() > 1 ? minority.size() - 1
                                                                            : std::size_t{1});
            SmoteResult sm =
                smote(minority_rows, k, minority.size(), child_seed(fold_seed, "smote"));
            Tensor Xaug(Xtr.rows() + sm.points.rows(), Xtr.cols());
            std::copy(Xtr.values.begin(), Xtr.values.end(), Xaug.values.begin());
            std::copy(sm.points.values.begin(), sm.points.values.end(),
                      Xaug.values.begin() + Xtr.values.size());
            std::vector<int> yaug = ytr;
            yaug.insert(yaug.end(), sm.points.rows(), 1);
            TrainOptions opts = base_train_options(cfg, lr, child_seed(fold_seed, "train"));
            TrainResult r = train(init, Xaug, labels_tensor(yaug), opts);
            final_params = std::move(r.params);
            out.train_loss_history = std::move(r.epoch_loss);
            break;
        }
        case Method::Focal: {
            TrainOptions opts = base_train_options(cfg, lr, child_seed(fold_seed, "train"));
            opts.loss.kind = LossKind::Focal;
            TrainResult r = train(init, Xtr, labels_tensor(ytr), opts);
            final_params = std::move(r.params);
            out.train_loss_history = std::move(r.epoch_loss);
            break;
        }
        case Method::Potential: {
            if (plan.withheld.empty())
                throw ConfigError(
                    "potential method requires an induced-imbalance run with a withheld pool");
            Tensor Xw = pd.X.gather_rows(plan.withheld);
            Tensor Xaug(Xtr.rows() + Xw.rows(), Xtr.cols());
            std::copy(Xtr.values.begin(), Xtr.values.end(), Xaug.values.begin());
            std::copy(Xw.values.begin(), Xw.values.end(), Xaug.values.begin() + Xtr.values.size());
            std::vector<int> yaug = ytr;
            yaug.insert(yaug.end(), Xw.rows(), 1);
            TrainOptions opts = base_train_options(cfg, lr, child_seed(fold_seed, "train"));
            TrainResult r = train(init, Xaug, labels_tensor(yaug), opts);
            final_params = std::move(r.params);
            out.train_loss_history = std::move(r.epoch_loss);
            break;
        }
        case Method::ExplicitGradient: {
            TrainOptions opts = base_train_options(cfg, lr, child_seed(fold_seed, "train"));
            TrainResult pre = train(init, Xtr, labels_tensor(ytr), opts);
            out.train_loss_history = pre.epoch_loss;
            SyntheticSet z0 =
                init_synthetic(Xtr, ytr, pre.params, cfg.meta.confidence_bound);
            out.synth_init = z0;
            MetaConfig mcfg = cfg.meta;
            mcfg.seed = child_seed(fold_seed, "meta");
            MetaData data{Xtr, labels_tensor(ytr), Xva, labels_tensor(yva)};
            out.meta_state = meta_train(data, pre.params, z0, mcfg);
            out.has_meta = true;
            final_params = out.meta_state.theta;
            break;
        }
    }

    const Tensor scores = predict(final_params, Xte);
    out.report = evaluate_scores(scores.values, yte);
    out.report.dataset = cfg.name;
    out.report.method = method_name(method);
    out.report.fold = fold_id;
    out.report.seed = cfg.seed;
    out.curve = pr_curve(scores.values, yte);
    return out;
}

MetricReport aggregate_reports(const std::vector<MetricReport>& folds) {
    MetricReport agg;
    if (folds.empty()) return agg;
    agg = folds.front();
    agg.fold = -1;
    double n = static_cast<double>(folds.size());
    agg.auc_pr = 0;
    agg.precision_at_075 = 0;
    agg.precision_at_050 = 0;
    agg.precision_at_025 = 0;
    agg.at_half = ThresholdMetrics{};
    for (const MetricReport& r : folds) {
        agg.auc_pr += r.auc_pr / n;
        agg.precision_at_075 += r.precision_at_075 / n;
        agg.precision_at_050 += r.precision_at_050 / n;
        agg.precision_at_025 += r.precision_at_025 / n;
        agg.at_half.f1 += r.at_half.f1 / n;
        agg.at_half.mcc += r.at_half.mcc / n;
        agg.at_half.kappa += r.at_half.kappa / n;
        agg.at_half.accuracy += r.at_half.accuracy / n;
        agg.at_half.counts.tp += r.at_half.counts.tp;
        agg.at_half.counts.fp += r.at_half.counts.fp;
        agg.at_half.counts.tn += r.at_half.counts.tn;
        agg.at_half.counts.fn += r.at_half.counts.fn;
    }
    return agg;
}

GridResult grid_search(const ExperimentConfig& cfg, const RawDataset& raw,
                       const std::vector<FoldPlan>& folds) {
    if (folds.empty()) throw ConfigError("grid_search: no folds planned");
    if (cfg.grid.layers.empty() || cfg.grid.widths.empty() || cfg.grid.lrs.empty())
        throw ConfigError("grid_search: empty grid");
    const FoldPlan& plan = folds.front();
    ProcessedDataset pd = preprocess(raw, plan.split.train, cfg.pca_dim);
    Tensor Xtr = pd.X.gather_rows(plan.split.train);
    std::vector<int> ytr;
    for (std::size_t i : plan.split.train) ytr.push_back(pd.y[i]);
    Tensor Xva = pd.X.gather_rows(plan.split.valid);
    std::vector<int> yva;
    for (std::size_t i : plan.split.valid) yva.push_back(pd.y[i]);

    GridResult best;
    bool first = true;
    for (std::size_t layers : cfg.grid.layers) {
        for (std::size_t width : cfg.grid.widths) {
            for (double lr : cfg.grid.lrs) {
                MlpArchitecture arch;
                arch.input_dim = pd.X.cols();
                arch.hidden.assign(layers, width);
                arch.activation = cfg.model.activation;
                TrainOptions opts =
                    base_train_options(cfg, lr, child_seed(cfg.seed, "grid.train"));
                TrainResult r = train(init_params(arch, child_seed(cfg.seed, "grid.init")), Xtr,
                                      labels_tensor(ytr), opts);
                const Tensor scores = predict(r.params, Xva);
                const double ap = average_precision(pr_curve(scores.values, yva));
                const bool better =
                    first || ap > best.valid_ap ||
                    (ap == best.valid_ap && arch.param_count() < best.arch.param_count()) ||
                    (ap == best.valid_ap && arch.param_count() == best.arch.param_count() &&
                     lr < best.lr);
                if (better) {
                    best.arch = arch;
                    best.lr = lr;
                    best.valid_ap = ap;
                    first = false;
                }
            }
        }
    }
    return best;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
    RawDataset raw = cfg.format == "csv" ? load_csv(cfg.dataset_path, cfg.csv)
                                         : load_keel_dat(cfg.dataset_path);
    const std::vector<FoldPlan> folds = plan_folds(cfg, raw);

    ExperimentOutcome out;
    out.dataset = cfg.name;
    {
        std::size_t majority = 0, minority = 0;
        std::vector<char> with(raw.size(), 0);
        for (std::size_t i : folds.front().withheld) with[i] = 1;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (with[i]) continue;
            (raw.labels[i] == 1 ? minority : majority)++;
        }
        out.realized_ir =
            minority ? static_cast<double>(majority) / static_cast<double>(minority) : 0.0;
    }

    MlpArchitecture arch;
    arch.hidden = cfg.model.hidden;
    arch.activation = cfg.model.activation;
    double lr = cfg.model.lr;
    if (cfg.grid.enabled) {
        GridResult g = grid_search(cfg, raw, folds);
        arch = g.arch;
        lr = g.lr;
    } else {
        // input width depends on preprocessing; probe with the first fold
        ProcessedDataset pd = preprocess(raw, folds.front().split.train, cfg.pca_dim);
        arch.input_dim = pd.X.cols();
    }
    out.arch = arch;
    out.lr = lr;

    for (Method m : cfg.methods) {
        std::vector<MetricReport> fold_reports;
        for (const FoldPlan& plan : folds) {
            RunResult r = run_fold(cfg, raw, m, plan, plan.split.fold, arch, lr);
            fold_reports.push_back(r.report);
            out.runs.push_back(std::move(r));
        }
        MetricReport agg = aggregate_reports(fold_reports);
        agg.ir = out.realized_ir;
        out.aggregates.push_back(agg);
    }
    for (RunResult& r : out.runs) r.report.ir = out.realized_ir;
    return out;
}

}  // namespace metaug
