#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "metaug/error.hpp"
#include "metaug/metrics.hpp"
#include "metaug/rng.hpp"

using namespace metaug;

namespace {

// Brute-force oracle: evaluate the confusion at every distinct threshold by
// direct counting (O(n^2)), then step-sum the curve.
struct BruteForce {
    std::vector<PrPoint> points;
    double ap = 0.0;

    BruteForce(const std::vector<double>& scores, const std::vector<int>& labels) {
        std::set<double, std::greater<double>> thresholds(scores.begin(), scores.end());
        std::size_t positives = 0;
        for (int y : labels) positives += y == 1;
        double prev_recall = 0.0;
        for (double t : thresholds) {
            std::size_t tp = 0, fp = 0;
            for (std::size_t i = 0; i < scores.size(); ++i) {
                if (scores[i] >= t) {
                    if (labels[i] == 1)
                        ++tp;
                    else
                        ++fp;
                }
            }
            PrPoint p;
            p.threshold = t;
            p.recall = static_cast<double>(tp) / static_cast<double>(positives);
            p.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
            points.push_back(p);
            ap += (p.recall - prev_recall) * p.precision;
            prev_recall = p.recall;
        }
    }
};

}  // namespace

TEST_CASE("pr_curve on a perfect ranking") {
    std::vector<double> scores = {0.9, 0.8, 0.3, 0.2, 0.1};
    std::vector<int> labels = {1, 1, 0, 0, 0};
    PrCurve c = pr_curve(scores, labels);
    for (const PrPoint& p : c.points)
        if (p.recall < 1.0 || p.threshold >= 0.8) CHECK(p.precision == 1.0);
    CHECK(average_precision(c) == 1.0);
    CHECK(precision_at_recall(c, 0.75) == 1.0);
    CHECK(precision_at_recall(c, 0.25) == 1.0);
}

TEST_CASE("pr_curve groups tied scores at one threshold") {
    std::vector<double> scores = {0.5, 0.5, 0.5, 0.5};
    std::vector<int> labels = {1, 0, 0, 1};
    PrCurve c = pr_curve(scores, labels);
    REQUIRE(c.points.size() == 1);
    CHECK(c.points[0].recall == 1.0);
    CHECK(c.points[0].precision == 0.5);
    CHECK(average_precision(c) == 0.5);
    CHECK(precision_at_recall(c, 0.5) == 0.5);
}

TEST_CASE("pr_curve requires a positive example and finite scores") {
    CHECK_THROWS_AS(pr_curve({0.1, 0.2}, {0, 0}), Error);
    CHECK_THROWS_AS(pr_curve({0.1, std::nan("")}, {0, 1}), Error);
}

TEST_CASE("hand-evaluated six-sample curve") {
    // Ranked labels: 1, 0, 1, 0, 0, 0.
    std::vector<double> scores = {0.9, 0.8, 0.7, 0.6, 0.5, 0.4};
    std::vector<int> labels = {1, 0, 1, 0, 0, 0};
    PrCurve c = pr_curve(scores, labels);
    CHECK(average_precision(c) == doctest::Approx(1.0 * 0.5 + (2.0 / 3.0) * 0.5).epsilon(1e-12));
    CHECK(precision_at_recall(c, 0.75) == doctest::Approx(2.0 / 3.0));
    CHECK(precision_at_recall(c, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("curve and ap match the brute-force oracle on 200 random cases") {
    Rng rng(424242);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.uniform_int(19);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        bool any_pos = false;
        for (std::size_t i = 0; i < n; ++i) {
            // quantized scores force tie groups in roughly half the cases
            scores[i] = trial % 2 ? rng.uniform() : std::floor(rng.uniform() * 4.0) / 4.0;
            labels[i] = rng.uniform_int(3) == 0 ? 1 : 0;
            any_pos = any_pos || labels[i] == 1;
        }
        if (!any_pos) labels[rng.uniform_int(n)] = 1;

        PrCurve c = pr_curve(scores, labels);
        BruteForce oracle(scores, labels);
        REQUIRE(c.points.size() == oracle.points.size());
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            CHECK(c.points[i].threshold == oracle.points[i].threshold);
            CHECK(c.points[i].recall == oracle.points[i].recall);
            CHECK(c.points[i].precision == oracle.points[i].precision);
        }
        CHECK(average_precision(c) == doctest::Approx(oracle.ap).epsilon(1e-12));

        // recall is monotone along the curve and inside [0,1]
        double prev = 0.0;
        for (const PrPoint& p : c.points) {
            CHECK(p.recall >= prev);
            CHECK(p.recall <= 1.0);
            CHECK(p.precision >= 0.0);
            CHECK(p.precision <= 1.0);
            prev = p.recall;
        }
    }
}

TEST_CASE("average precision is invariant under monotone score transforms") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 5 + rng.uniform_int(15);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = rng.uniform(-3, 3);
            labels[i] = rng.uniform_int(2);
        }
        labels[0] = 1;
        std::vector<double> transformed(n);
        for (std::size_t i = 0; i < n; ++i)
            transformed[i] = std::exp(0.7 * scores[i]) + 2.0;  // strictly increasing
        const double a = average_precision(pr_curve(scores, labels));
        const double b = average_precision(pr_curve(transformed, labels));
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("ap of random scores concentrates near the positive rate") {
    Rng rng(2024);
    const std::size_t n = 400, pos = 80;
    double sum = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> scores(n);
        std::vector<int> labels(n, 0);
        for (std::size_t i = 0; i < pos; ++i) labels[i] = 1;
        for (double& s : scores) s = rng.uniform();
        sum += average_precision(pr_curve(scores, labels));
    }
    const double mean = sum / 1000.0;
    CHECK(std::fabs(mean - 0.2) < 0.02);
}

TEST_CASE("precision_at_recall is non-increasing in r") {
    Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 6 + rng.uniform_int(14);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = rng.uniform();
            labels[i] = rng.uniform_int(2);
        }
        labels[0] = 1;
        PrCurve c = pr_curve(scores, labels);
        double prev = 2.0;
        for (double r : {0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
            const double p = precision_at_recall(c, r);
            CHECK(p <= prev + 1e-12);
            prev = p;
        }
    }
}

TEST_CASE("threshold metrics") {
    SUBCASE("all correct") {
        ThresholdMetrics m = threshold_metrics({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}, 0.5);
        CHECK(m.f1 == 1.0);
        CHECK(m.mcc == 1.0);
        CHECK(m.kappa == 1.0);
        CHECK(m.accuracy == 1.0);
    }
    SUBCASE("always-majority predictor: high accuracy, zero f1") {
        std::vector<double> scores(100, 0.0);
        std::vector<int> labels(100, 0);
        for (std::size_t i = 0; i < 5; ++i) labels[i] = 1;  // minority rate 0.05
        ThresholdMetrics m = threshold_metrics(scores, labels, 0.5);
        CHECK(m.accuracy == doctest::Approx(0.95));
        CHECK(m.f1 == 0.0);
        CHECK(m.mcc == 0.0);
        CHECK(m.kappa == 0.0);
    }
    SUBCASE("hand-computed confusion tp=3 fp=1 fn=1 tn=5") {
        std::vector<double> scores = {0.9, 0.9, 0.9, 0.9, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
        std::vector<int> labels = {1, 1, 1, 0, 1, 0, 0, 0, 0, 0};
        ThresholdMetrics m = threshold_metrics(scores, labels, 0.5);
        CHECK(m.counts.tp == 3);
        CHECK(m.counts.fp == 1);
        CHECK(m.counts.fn == 1);
        CHECK(m.counts.tn == 5);
        CHECK(m.f1 == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(m.mcc == doctest::Approx(14.0 / 24.0).epsilon(1e-12));
        CHECK(m.kappa == doctest::Approx((0.8 - 0.52) / (1.0 - 0.52)).epsilon(1e-12));
        CHECK(m.accuracy == doctest::Approx(0.8));
    }
}

TEST_CASE("evaluate_scores aggregates the report fields") {
    std::vector<double> scores = {0.9, 0.8, 0.7, 0.6, 0.5, 0.4};
    std::vector<int> labels = {1, 0, 1, 0, 0, 0};
    MetricReport r = evaluate_scores(scores, labels);
    CHECK(r.auc_pr == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(r.precision_at_075 == doctest::Approx(2.0 / 3.0));
    CHECK(r.precision_at_050 == doctest::Approx(1.0));
    CHECK(r.precision_at_025 == doctest::Approx(1.0));
    CHECK(r.at_half.counts.tp + r.at_half.counts.fn == 2);
}
