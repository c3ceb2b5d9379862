#pragma once

#include <cstdint>
#include <vector>

#include "metaug/dataset.hpp"
#include "metaug/mlp.hpp"
#include "metaug/rng.hpp"

namespace metaug {

// Index multiset with exactly equal class counts: every original index plus
// minority repeats drawn with replacement.
std::vector<std::size_t> upsample_minority(const std::vector<int>& y, std::uint64_t seed);

// Batches holding batch_size/2 indices per class. Majority indices pass
// without repetition until the epoch's shuffled queue is exhausted; minority
// indices cycle through reshuffled queues as needed.
class BalancedBatchSampler {
public:
    BalancedBatchSampler(const std::vector<int>& y, std::size_t batch_size, std::uint64_t seed);
    std::vector<std::vector<std::size_t>> epoch_batches();
    std::size_t batches_per_epoch() const;

private:
    std::vector<std::size_t> majority_, minority_;
    std::size_t half_;
    Rng rng_;
    std::vector<std::size_t> minority_queue_;

    std::size_t next_minority();
};

struct SmoteResult {
    Tensor points;  // n_new x d
    // Audit trail: row i was seeded at minority row seed_index[i], pushed
    // toward neighbor_index[i] by fraction lambda[i].
    std::vector<std::size_t> seed_index;
    std::vector<std::size_t> neighbor_index;
    std::vector<double> lambda;
};

// Interpolation between minority rows and their k nearest minority neighbors
// (Euclidean, ties broken by lower row index).
SmoteResult smote(const Tensor& minority_rows, std::size_t k, std::size_t n_new,
                  std::uint64_t seed);

// Optimizable minority-labeled points, initialized from low-confidence
// minority training rows.
struct SyntheticSet {
    Tensor Z;
    std::vector<std::size_t> origin;  // seeding row in the training set
};

// Duplicates exactly the minority training rows whose predicted minority
// probability is <= confidence_bound.
SyntheticSet init_synthetic(const Tensor& X_train, const std::vector<int>& y_train,
                            const ParamSet& classifier, double confidence_bound);

}  // namespace metaug
