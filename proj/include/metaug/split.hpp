#pragma once

#include <cstdint>
#include <vector>

#include "metaug/dataset.hpp"

namespace metaug {

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> valid;
    std::vector<std::size_t> test;
    int fold = -1;
};

// Seeded stratified partition. Two fractions produce {train, test}; three
// produce {train, valid, test}. Per-class counts match the fractions within
// one sample (largest-remainder allocation).
SplitIndices stratified_split(const std::vector<int>& y, const std::vector<double>& fractions,
                              std::uint64_t seed);

// k folds, each index in exactly one test fold, class ratios preserved within
// one sample. With valid_fraction > 0 a stratified slice of the non-test
// rows becomes the validation set of each fold.
std::vector<SplitIndices> stratified_kfold(const std::vector<int>& y, std::size_t k,
                                           std::uint64_t seed, double valid_fraction = 0.0);

struct ImbalanceSpec {
    double target_ir = 1.0;  // majority / minority, must be >= the current IR
    std::uint64_t seed = 0;
};

struct InducedImbalance {
    std::vector<std::size_t> retained;           // all majority + kept minority, original order
    std::vector<std::size_t> withheld_minority;  // dropped minority rows
};

// Downsamples the minority class uniformly at random to
// ceil(majority / target_ir); the dropped rows are returned intact for the
// potential baseline.
InducedImbalance induce_imbalance(const std::vector<int>& y, const ImbalanceSpec& spec);

}  // namespace metaug
