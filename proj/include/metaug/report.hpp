#pragma once

#include <string>
#include <vector>

#include "metaug/experiment.hpp"

namespace metaug {

// Fixed CSV headers; one row per (dataset, method, ir, fold, seed).
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricReport& r);
std::string pr_curve_csv(const PrCurve& curve);

// Table-4-style pivot: one row per dataset, one AP column per method.
std::string ap_table_csv(const std::vector<MetricReport>& aggregates,
                         const std::vector<std::string>& method_order);

// Minimal line plot. Each series is (x, y) pairs; the output is well-formed
// standalone SVG.
struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};
std::string svg_line_plot(const std::vector<PlotSeries>& series, const std::string& title,
                          const std::string& x_label, const std::string& y_label);

void write_text_file(const std::string& path, const std::string& content);
void ensure_directory(const std::string& path);

// Writes metrics.csv, aggregate.csv, per-run PR curves, convergence CSVs and
// SVG plots for one experiment under cfg.out_dir.
void emit_reports(const ExperimentConfig& cfg, const ExperimentOutcome& outcome);

// Checkpoint of a meta run: parameters, synthetic set and epoch count.
std::string checkpoint_json(const MetaState& state);
MetaState checkpoint_from_json(const std::string& text);

std::string synthetic_set_csv(const SyntheticSet& initial, const SyntheticSet& final_set);

}  // namespace metaug
