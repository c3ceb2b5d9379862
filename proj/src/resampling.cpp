#include "metaug/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metaug/error.hpp"

namespace metaug {

std::vector<std::size_t> upsample_minority(const std::vector<int>& y, std::uint64_t seed) {
    std::vector<std::size_t> majority, minority;
    for (std::size_t i = 0; i < y.size(); ++i)
        (y[i] == 1 ? minority : majority).push_back(i);
    if (majority.empty() || minority.empty())
        throw Error("upsample_minority: both classes must be nonempty");

    std::vector<std::size_t> out(y.size());
    std::iota(out.begin(), out.end(), 0);
    Rng rng(seed);
    for (std::size_t extra = majority.size() - minority.size(); extra > 0; --extra)
        out.push_back(minority[rng.uniform_int(minority.size())]);
    return out;
}

BalancedBatchSampler::BalancedBatchSampler(const std::vector<int>& y, std::size_t batch_size,
                                           std::uint64_t seed)
    : half_(batch_size / 2), rng_(seed) {
    if (batch_size % 2 != 0 || batch_size == 0)
        throw Error("balanced_batch_sampler: batch_size must be even and positive");
    for (std::size_t i = 0; i < y.size(); ++i)
        (y[i] == 1 ? minority_ : majority_).push_back(i);
    if (majority_.empty() || minority_.empty())
        throw Error("balanced_batch_sampler: both classes must be nonempty");
}

std::size_t BalancedBatchSampler::batches_per_epoch() const {
    return (majority_.size() + half_ - 1) / half_;
}

std::size_t BalancedBatchSampler::next_minority() {
    if (minority_queue_.empty()) {
        minority_queue_ = minority_;
        rng_.shuffle(minority_queue_);
    }
    const std::size_t idx = minority_queue_.back();
    minority_queue_.pop_back();
    return idx;
}

std::vector<std::vector<std::size_t>> BalancedBatchSampler::epoch_batches() {
    std::vector<std::size_t> maj = majority_;
    rng_.shuffle(maj);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < maj.size(); start += half_) {
        const std::size_t take = std::min(half_, maj.size() - start);
        std::vector<std::size_t> batch;
        batch.reserve(2 * take);
        for (std::size_t i = 0; i < take; ++i) batch.push_back(maj[start + i]);
        for (std::size_t i = 0; i < take; ++i) batch.push_back(next_minority());
        batches.push_back(std::move(batch));
    }
    return batches;
}

SmoteResult smote(const Tensor& minority_rows, std::size_t k, std::size_t n_new,
                  std::uint64_t seed) {
    const std::size_t n = minority_rows.rows();
    const std::size_t d = minority_rows.cols();
    if (k == 0) throw Error("smote: k must be >= 1");
    if (n < k + 1)
        throw Error("smote: need at least k+1 = " + std::to_string(k + 1) +
                    " minority samples, have " + std::to_string(n));

    // k nearest neighbors per row; ties broken by lower row index.
    std::vector<std::vector<std::size_t>> neighbors(n);
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t i = 0; i < n; ++i) {
        dist.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = minority_rows.at(i, c) - minority_rows.at(j, c);
                s += diff * diff;
            }
            dist.emplace_back(s, j);
        }
        std::stable_sort(dist.begin(), dist.end());
        neighbors[i].reserve(k);
        for (std::size_t t = 0; t < k; ++t) neighbors[i].push_back(dist[t].second);
    }

    Rng rng(seed);
    SmoteResult out;
    out.points = Tensor(n_new, d);
    out.seed_index.reserve(n_new);
    out.neighbor_index.reserve(n_new);
    out.lambda.reserve(n_new);
    for (std::size_t s = 0; s < n_new; ++s) {
        const std::size_t i = rng.uniform_int(n);
        const std::size_t nn = neighbors[i][rng.uniform_int(k)];
        const double lambda = rng.uniform();
        for (std::size_t c = 0; c < d; ++c)
            out.points.at(s, c) =
                minority_rows.at(i, c) + lambda * (minority_rows.at(nn, c) - minority_rows.at(i, c));
        out.seed_index.push_back(i);
        out.neighbor_index.push_back(nn);
        out.lambda.push_back(lambda);
    }
    return out;
}

SyntheticSet init_synthetic(const Tensor& X_train, const std::vector<int>& y_train,
                            const ParamSet& classifier, double confidence_bound) {
    if (confidence_bound < 0.0 || confidence_bound > 1.0)
        throw Error("init_synthetic: confidence bound must be in [0,1]");
    std::vector<std::size_t> minority;
    for (std::size_t i = 0; i < y_train.size(); ++i)
        if (y_train[i] == 1) minority.push_back(i);
    if (minority.empty()) throw Error("init_synthetic: no minority rows in training data");

    const Tensor scores = predict(classifier, X_train.gather_rows(minority));
    SyntheticSet out;
    std::vector<std::size_t> selected;
    for (std::size_t i = 0; i < minority.size(); ++i)
        if (scores.values[i] <= confidence_bound) selected.push_back(i);
    if (selected.empty())
        throw Error("init_synthetic: no minority sample scores at or below c = " +
                    std::to_string(confidence_bound) + "; increase the confidence bound");

    out.Z = Tensor(selected.size(), X_train.cols());
    for (std::size_t r = 0; r < selected.size(); ++r) {
        const std::size_t src = minority[selected[r]];
        out.origin.push_back(src);
        for (std::size_t c = 0; c < X_train.cols(); ++c) out.Z.at(r, c) = X_train.at(src, c);
    }
    return out;
}

}  // namespace metaug
