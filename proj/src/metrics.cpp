#include "metaug/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metaug/error.hpp"

namespace metaug {

PrCurve pr_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw Error("pr_curve: scores/labels size mismatch");
    std::size_t positives = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw Error("pr_curve: labels must be 0/1");
        positives += y == 1;
    }
    if (positives == 0) throw Error("pr_curve: at least one positive label required");
    for (double s : scores)
        if (!std::isfinite(s)) throw Error("pr_curve: non-finite score");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    PrCurve curve;
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        // absorb the whole tie group
        while (i < order.size() && scores[order[i]] == threshold) {
            if (labels[order[i]] == 1)
                ++tp;
            else
                ++fp;
            ++i;
        }
        PrPoint p;
        p.threshold = threshold;
        p.recall = static_cast<double>(tp) / static_cast<double>(positives);
        p.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        curve.points.push_back(p);
    }
    return curve;
}

double average_precision(const PrCurve& curve) {
    double ap = 0.0;
    double prev_recall = 0.0;
    for (const PrPoint& p : curve.points) {
        ap += (p.recall - prev_recall) * p.precision;
        prev_recall = p.recall;
    }
    return ap;
}

double precision_at_recall(const PrCurve& curve, double r) {
    if (r <= 0.0 || r > 1.0) throw Error("precision_at_recall: r must be in (0,1]");
    // Highest precision attainable at recall >= r (the monotone envelope of
    // the curve read at the first qualifying point).
    double best = 0.0;
    for (const PrPoint& p : curve.points)
        if (p.recall >= r) best = std::max(best, p.precision);
    return best;
}

ThresholdMetrics threshold_metrics(const std::vector<double>& scores,
                                   const std::vector<int>& labels, double threshold) {
    if (scores.size() != labels.size())
        throw Error("threshold_metrics: scores/labels size mismatch");
    if (!std::isfinite(threshold)) throw Error("threshold_metrics: non-finite threshold");

    ThresholdMetrics m;
    auto& c = m.counts;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= threshold;
        const bool truth = labels[i] == 1;
        if (pred && truth)
            ++c.tp;
        else if (pred && !truth)
            ++c.fp;
        else if (!pred && truth)
            ++c.fn;
        else
            ++c.tn;
    }
    const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
    const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
    const double n = tp + fp + tn + fn;
    m.accuracy = n > 0 ? (tp + tn) / n : 0.0;
    m.f1 = (2 * tp + fp + fn) > 0 ? 2 * tp / (2 * tp + fp + fn) : 0.0;

    const double mcc_denom = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
    m.mcc = mcc_denom > 0 ? (tp * tn - fp * fn) / mcc_denom : 0.0;

    const double po = m.accuracy;
    const double pe = n > 0 ? ((tp + fp) * (tp + fn) + (tn + fn) * (tn + fp)) / (n * n) : 0.0;
    m.kappa = (1.0 - pe) > 0 ? (po - pe) / (1.0 - pe) : 0.0;
    return m;
}

MetricReport evaluate_scores(const std::vector<double>& scores, const std::vector<int>& labels) {
    MetricReport r;
    const PrCurve curve = pr_curve(scores, labels);
    r.auc_pr = average_precision(curve);
    r.precision_at_075 = precision_at_recall(curve, 0.75);
    r.precision_at_050 = precision_at_recall(curve, 0.50);
    r.precision_at_025 = precision_at_recall(curve, 0.25);
    r.at_half = threshold_metrics(scores, labels, 0.5);
    return r;
}

}  // namespace metaug
