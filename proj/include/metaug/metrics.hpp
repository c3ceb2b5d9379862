#pragma once

#include <string>
#include <vector>

namespace metaug {

struct PrPoint {
    double threshold;
    double recall;
    double precision;
};

// Points sorted by descending threshold (recall non-decreasing); tied scores
// are grouped at a single threshold.
struct PrCurve {
    std::vector<PrPoint> points;
};

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

struct ThresholdMetrics {
    double f1 = 0.0;
    double mcc = 0.0;
    double kappa = 0.0;
    double accuracy = 0.0;
    ConfusionCounts counts;
};

struct MetricReport {
    std::string dataset;
    std::string method;
    double ir = 0.0;
    int fold = -1;
    std::uint64_t seed = 0;
    double auc_pr = 0.0;
    double precision_at_075 = 0.0;
    double precision_at_050 = 0.0;
    double precision_at_025 = 0.0;
    ThresholdMetrics at_half;  // reporting threshold 0.5
};

PrCurve pr_curve(const std::vector<double>& scores, const std::vector<int>& labels);

// Step-wise sum over curve points: AP = sum (R_n - R_{n-1}) * P_n.
double average_precision(const PrCurve& curve);

// Precision at the first point (descending threshold) with recall >= r.
double precision_at_recall(const PrCurve& curve, double r);

// Prediction rule: score >= threshold is positive. Degenerate denominators
// yield 0 for MCC and kappa.
ThresholdMetrics threshold_metrics(const std::vector<double>& scores,
                                   const std::vector<int>& labels, double threshold);

MetricReport evaluate_scores(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace metaug
