#include <atomic>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "metaug/error.hpp"
#include "metaug/experiment.hpp"
#include "metaug/report.hpp"
#include "metaug/sine.hpp"

using namespace metaug;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string dataset;
    std::string method;
    double ir = 0.0;
    int folds = -1;
    std::int64_t seed = -1;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config file");
    cmd->add_option("--dataset", opts.dataset, "dataset path (.dat or .csv)");
    cmd->add_option("--method", opts.method, "method: ce|rs|smote|focal|explicit_gradient|potential");
    cmd->add_option("--ir", opts.ir, "induced imbalance ratio target");
    cmd->add_option("--folds", opts.folds, "cross-validation folds (1 = single split)");
    cmd->add_option("--seed", opts.seed, "master seed");
    cmd->add_option("--out", opts.out, "output directory");
}

ExperimentConfig make_config(const CommonOpts& opts) {
    ExperimentConfig cfg = opts.config_path.empty()
                               ? ExperimentConfig{}
                               : experiment_from_config(ConfigFile::load(opts.config_path));
    if (!opts.dataset.empty()) {
        cfg.dataset_path = opts.dataset;
        std::string base = opts.dataset;
        const std::size_t slash = base.find_last_of('/');
        if (slash != std::string::npos) base = base.substr(slash + 1);
        const std::size_t dot = base.find_last_of('.');
        cfg.name = dot == std::string::npos ? base : base.substr(0, dot);
        if (opts.dataset.size() > 4 && opts.dataset.substr(opts.dataset.size() - 4) == ".csv")
            cfg.format = "csv";
    }
    if (!opts.method.empty()) cfg.methods = {method_from_name(opts.method)};
    if (opts.ir > 0.0) cfg.ir_target = opts.ir;
    if (opts.folds > 0) cfg.folds = static_cast<std::size_t>(opts.folds);
    if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
    if (!opts.out.empty()) cfg.out_dir = opts.out;
    if (cfg.dataset_path.empty()) throw ConfigError("no dataset given (--dataset or config file)");
    return cfg;
}

int cmd_prep(const CommonOpts& opts, std::size_t pca_dim) {
    ExperimentConfig cfg = make_config(opts);
    if (pca_dim > 0) cfg.pca_dim = pca_dim;
    RawDataset raw = cfg.format == "csv" ? load_csv(cfg.dataset_path, cfg.csv)
                                         : load_keel_dat(cfg.dataset_path);
    std::vector<std::size_t> all(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) all[i] = i;
    ProcessedDataset pd = preprocess(raw, all, cfg.pca_dim);

    ensure_directory(cfg.out_dir);
    std::ostringstream out;
    for (std::size_t c = 0; c < pd.X.cols(); ++c) out << 'x' << c << ',';
    out << "label\n";
    out.precision(12);
    for (std::size_t r = 0; r < pd.X.rows(); ++r) {
        for (std::size_t c = 0; c < pd.X.cols(); ++c) out << pd.X.at(r, c) << ',';
        out << pd.y[r] << '\n';
    }
    write_text_file(cfg.out_dir + "/processed.csv", out.str());
    std::printf("%s: %zu rows, %zu features, IR %.2f, %zu dropped\n", raw.name.c_str(), pd.size(),
                pd.X.cols(), pd.imbalance_ratio(), raw.dropped_rows);
    for (const std::string& w : pd.transform.warnings)
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    return 0;
}

int run_and_emit(const ExperimentConfig& cfg) {
    ExperimentOutcome outcome = run_experiment(cfg);
    emit_reports(cfg, outcome);
    for (const MetricReport& r : outcome.aggregates)
        std::printf("%s %s: AP %.4f f1 %.4f mcc %.4f kappa %.4f\n", r.dataset.c_str(),
                    r.method.c_str(), r.auc_pr, r.at_half.f1, r.at_half.mcc, r.at_half.kappa);

    for (const RunResult& r : outcome.runs) {
        if (!r.has_meta) continue;
        const std::string tag = "_fold" + std::to_string(r.report.fold);
        write_text_file(cfg.out_dir + "/checkpoint" + tag + ".json",
                        checkpoint_json(r.meta_state));
        write_text_file(cfg.out_dir + "/synthetic" + tag + ".csv",
                        synthetic_set_csv(r.synth_init, r.meta_state.synth));
    }
    return 0;
}

int cmd_train(const CommonOpts& opts) { return run_and_emit(make_config(opts)); }

int cmd_meta_train(const CommonOpts& opts) {
    ExperimentConfig cfg = make_config(opts);
    cfg.methods = {Method::ExplicitGradient};
    return run_and_emit(cfg);
}

int cmd_bench(const CommonOpts& opts, std::size_t jobs) {
    if (opts.config_path.empty()) throw ConfigError("bench requires --config");
    const ConfigFile file = ConfigFile::load(opts.config_path);
    ExperimentConfig base = experiment_from_config(file);
    if (opts.seed >= 0) base.seed = static_cast<std::uint64_t>(opts.seed);
    if (!opts.out.empty()) base.out_dir = opts.out;
    if (opts.folds > 0) base.folds = static_cast<std::size_t>(opts.folds);

    std::vector<std::string> datasets = file.get_list("experiment", "datasets");
    if (datasets.empty() && !base.dataset_path.empty()) datasets = {base.dataset_path};
    if (datasets.empty()) throw ConfigError("bench: no datasets listed");

    std::vector<ExperimentConfig> tasks;
    for (const std::string& path : datasets) {
        ExperimentConfig cfg = base;
        cfg.dataset_path = path;
        std::string base_name = path;
        const std::size_t slash = base_name.find_last_of('/');
        if (slash != std::string::npos) base_name = base_name.substr(slash + 1);
        const std::size_t dot = base_name.find_last_of('.');
        cfg.name = dot == std::string::npos ? base_name : base_name.substr(0, dot);
        cfg.out_dir = base.out_dir + "/" + cfg.name;
        tasks.push_back(std::move(cfg));
    }

    std::vector<ExperimentOutcome> outcomes(tasks.size());
    std::vector<std::string> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                outcomes[i] = run_experiment(tasks[i]);
                emit_reports(tasks[i], outcomes[i]);
                std::lock_guard<std::mutex> lock(log_mutex);
                std::printf("done %s\n", tasks[i].name.c_str());
            } catch (const std::exception& e) {
                errors[i] = e.what();
                std::lock_guard<std::mutex> lock(log_mutex);
                std::fprintf(stderr, "error: dataset %s: %s\n", tasks[i].name.c_str(), e.what());
            }
        }
    };
    const std::size_t n_workers = std::max<std::size_t>(1, std::min(jobs, tasks.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    // merged tables in task order
    std::string metrics = metrics_csv_header();
    std::vector<MetricReport> aggregates;
    for (const ExperimentOutcome& o : outcomes) {
        for (const RunResult& r : o.runs) metrics += metrics_csv_row(r.report);
        aggregates.insert(aggregates.end(), o.aggregates.begin(), o.aggregates.end());
    }
    ensure_directory(base.out_dir);
    write_text_file(base.out_dir + "/metrics.csv", metrics);
    std::string agg_csv = metrics_csv_header();
    for (const MetricReport& r : aggregates) agg_csv += metrics_csv_row(r);
    write_text_file(base.out_dir + "/aggregate.csv", agg_csv);
    std::vector<std::string> method_order;
    for (Method m : base.methods) method_order.push_back(method_name(m));
    write_text_file(base.out_dir + "/ap_table.csv", ap_table_csv(aggregates, method_order));

    int failures = 0;
    for (std::size_t i = 0; i < tasks.size(); ++i)
        if (!errors[i].empty()) ++failures;
    return failures == 0 ? 0 : 1;
}

int cmd_sine(std::uint64_t seed, std::size_t k1, std::size_t k2, std::size_t n_synth,
             std::size_t meta_epochs, const std::string& out_dir) {
    SineExperimentConfig cfg;
    cfg.task.seed = seed;
    cfg.task.k1 = k1;
    cfg.task.k2 = k2;
    cfg.task.n_synth = n_synth;
    if (meta_epochs > 0) cfg.meta_epochs = meta_epochs;
    SineData data = generate_sine_task(cfg.task);
    SineReport report = run_sine_experiment(cfg);
    ensure_directory(out_dir);
    write_text_file(out_dir + "/points.csv", sine_points_csv(report, data));
    if (report.meta_state.epochs_run > 0)
        write_text_file(out_dir + "/convergence.csv", convergence_csv(report.meta_state));
    std::ostringstream summary;
    summary.precision(12);
    summary << "metric,value\n"
            << "baseline_mse," << report.baseline_mse << '\n'
            << "pretrained_mse," << report.pretrained_mse << '\n'
            << "meta_mse," << report.meta_mse << '\n'
            << "synth_dist_init," << report.synth_dist_init << '\n'
            << "synth_dist_final," << report.synth_dist_final << '\n';
    write_text_file(out_dir + "/summary.csv", summary.str());
    std::printf("baseline %.4f  pretrained %.4f  meta %.4f  dist %.3f -> %.3f\n",
                report.baseline_mse, report.pretrained_mse, report.meta_mse,
                report.synth_dist_init, report.synth_dist_final);
    return 0;
}

int cmd_report(const std::string& in_csv, const std::string& out_dir) {
    std::ifstream in(in_csv);
    if (!in) throw Error("report: cannot open " + in_csv);
    std::string line;
    if (!std::getline(in, line)) throw Error("report: empty metrics file");

    std::vector<MetricReport> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                f.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        f.push_back(cur);
        if (f.size() < 13) throw ParseError("report: malformed metrics row: " + line);
        MetricReport r;
        r.dataset = f[0];
        r.method = f[1];
        r.ir = std::stod(f[2]);
        r.fold = std::stoi(f[3]);
        r.seed = static_cast<std::uint64_t>(std::stoull(f[4]));
        r.auc_pr = std::stod(f[5]);
        r.precision_at_075 = std::stod(f[6]);
        r.precision_at_050 = std::stod(f[7]);
        r.precision_at_025 = std::stod(f[8]);
        r.at_half.f1 = std::stod(f[9]);
        r.at_half.mcc = std::stod(f[10]);
        r.at_half.kappa = std::stod(f[11]);
        r.at_half.accuracy = std::stod(f[12]);
        rows.push_back(std::move(r));
    }

    // group per (dataset, method), preserving first-seen order
    std::vector<std::pair<std::string, std::vector<MetricReport>>> groups;
    for (const MetricReport& r : rows) {
        const std::string key = r.dataset + "\x1f" + r.method;
        bool found = false;
        for (auto& g : groups)
            if (g.first == key) {
                g.second.push_back(r);
                found = true;
            }
        if (!found) groups.push_back({key, {r}});
    }
    std::vector<MetricReport> aggregates;
    std::vector<std::string> method_order;
    for (const auto& g : groups) {
        aggregates.push_back(aggregate_reports(g.second));
        const std::string m = g.second.front().method;
        bool seen = false;
        for (const std::string& s : method_order) seen = seen || s == m;
        if (!seen) method_order.push_back(m);
    }
    ensure_directory(out_dir);
    std::string agg_csv = metrics_csv_header();
    for (const MetricReport& r : aggregates) agg_csv += metrics_csv_row(r);
    write_text_file(out_dir + "/aggregate.csv", agg_csv);
    write_text_file(out_dir + "/ap_table.csv", ap_table_csv(aggregates, method_order));
    std::printf("aggregated %zu rows into %zu groups\n", rows.size(), groups.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"explicit-gradient meta-learning for imbalanced tabular classification"};
    app.require_subcommand(1);

    CommonOpts prep_opts, train_opts, meta_opts, bench_opts;
    std::size_t prep_pca = 0;
    auto* prep = app.add_subcommand("prep", "load a dataset, preprocess, dump the feature matrix");
    add_common(prep, prep_opts);
    prep->add_option("--pca-dim", prep_pca, "project to this many PCA components");

    auto* train = app.add_subcommand("train", "train one method and evaluate per fold");
    add_common(train, train_opts);

    auto* meta = app.add_subcommand("meta-train", "pretrain, then run the meta loop");
    add_common(meta, meta_opts);

    std::size_t jobs = 1;
    auto* bench = app.add_subcommand("bench", "run every dataset x method in a config");
    add_common(bench, bench_opts);
    bench->add_option("--jobs", jobs, "worker threads");

    std::uint64_t sine_seed = 0;
    std::size_t sine_k1 = 5, sine_k2 = 5, sine_n = 20, sine_epochs = 0;
    std::string sine_out = "out/sine";
    auto* sine = app.add_subcommand("sine-demo", "imbalanced sine regression reproduction");
    sine->add_option("--seed", sine_seed, "rng seed");
    sine->add_option("--k1", sine_k1, "training points");
    sine->add_option("--k2", sine_k2, "held-out points");
    sine->add_option("--n-synth", sine_n, "synthetic points");
    sine->add_option("--meta-epochs", sine_epochs, "meta-training epochs");
    sine->add_option("--out", sine_out, "output directory");

    std::string report_in = "out/metrics.csv", report_out = "out";
    auto* report = app.add_subcommand("report", "re-aggregate a metrics.csv into tables");
    report->add_option("--in", report_in, "metrics csv produced by train/bench");
    report->add_option("--out", report_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (prep->parsed()) return cmd_prep(prep_opts, prep_pca);
        if (train->parsed()) return cmd_train(train_opts);
        if (meta->parsed()) return cmd_meta_train(meta_opts);
        if (bench->parsed()) return cmd_bench(bench_opts, jobs);
        if (sine->parsed()) return cmd_sine(sine_seed, sine_k1, sine_k2, sine_n, sine_epochs, sine_out);
        if (report->parsed()) return cmd_report(report_in, report_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
