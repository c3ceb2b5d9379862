#include "metaug/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metaug/error.hpp"
#include "metaug/rng.hpp"

namespace metaug {

namespace {

std::vector<std::vector<std::size_t>> indices_by_class(const std::vector<int>& y) {
    std::vector<std::vector<std::size_t>> by_class(2);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0 && y[i] != 1) throw Error("split: labels must be 0/1");
        by_class[static_cast<std::size_t>(y[i])].push_back(i);
    }
    return by_class;
}

// Largest-remainder allocation of n items to parts with the given fractions.
std::vector<std::size_t> allocate(std::size_t n, const std::vector<double>& fractions) {
    std::vector<std::size_t> counts(fractions.size());
    std::vector<double> remainders(fractions.size());
    std::size_t assigned = 0;
    for (std::size_t j = 0; j < fractions.size(); ++j) {
        const double exact = fractions[j] * static_cast<double>(n);
        counts[j] = static_cast<std::size_t>(std::floor(exact));
        remainders[j] = exact - std::floor(exact);
        assigned += counts[j];
    }
    std::vector<std::size_t> order(fractions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) counts[order[k % order.size()]]++;
    return counts;
}

}  // namespace

SplitIndices stratified_split(const std::vector<int>& y, const std::vector<double>& fractions,
                              std::uint64_t seed) {
    if (fractions.empty() || fractions.size() > 3)
        throw ConfigError("stratified_split: 1 to 3 fractions supported");
    double total = 0.0;
    for (double f : fractions) {
        if (f < 0.0) throw ConfigError("stratified_split: negative fraction");
        total += f;
    }
    if (std::fabs(total - 1.0) > 1e-9) throw ConfigError("stratified_split: fractions must sum to 1");

    auto by_class = indices_by_class(y);
    std::size_t parts_with_mass = 0;
    for (double f : fractions) parts_with_mass += f > 0.0;
    for (const auto& cls : by_class)
        if (!cls.empty() && cls.size() < parts_with_mass)
            throw ConfigError("stratified_split: class with " + std::to_string(cls.size()) +
                              " samples cannot fill " + std::to_string(parts_with_mass) + " parts");

    Rng rng(seed);
    std::vector<std::vector<std::size_t>> parts(fractions.size());
    for (auto& cls : by_class) {
        if (cls.empty()) continue;
        rng.shuffle(cls);
        const auto counts = allocate(cls.size(), fractions);
        std::size_t pos = 0;
        for (std::size_t j = 0; j < counts.size(); ++j)
            for (std::size_t k = 0; k < counts[j]; ++k) parts[j].push_back(cls[pos++]);
    }
    for (auto& p : parts) std::sort(p.begin(), p.end());

    SplitIndices out;
    if (fractions.size() == 1) {
        out.train = std::move(parts[0]);
    } else if (fractions.size() == 2) {
        out.train = std::move(parts[0]);
        out.test = std::move(parts[1]);
    } else {
        out.train = std::move(parts[0]);
        out.valid = std::move(parts[1]);
        out.test = std::move(parts[2]);
    }
    return out;
}

std::vector<SplitIndices> stratified_kfold(const std::vector<int>& y, std::size_t k,
                                           std::uint64_t seed, double valid_fraction) {
    if (k < 2) throw ConfigError("stratified_kfold: k must be >= 2");
    if (valid_fraction < 0.0 || valid_fraction >= 1.0)
        throw ConfigError("stratified_kfold: valid_fraction must be in [0,1)");
    auto by_class = indices_by_class(y);
    for (const auto& cls : by_class)
        if (cls.size() < k)
            throw ConfigError("stratified_kfold: class with " + std::to_string(cls.size()) +
                              " samples cannot fill " + std::to_string(k) + " folds");

    Rng rng(seed);
    std::vector<std::vector<std::size_t>> fold_members(k);
    for (auto& cls : by_class) {
        if (cls.empty()) continue;
        rng.shuffle(cls);
        for (std::size_t i = 0; i < cls.size(); ++i) fold_members[i % k].push_back(cls[i]);
    }

    std::vector<SplitIndices> folds;
    for (std::size_t f = 0; f < k; ++f) {
        SplitIndices s;
        s.fold = static_cast<int>(f);
        s.test = fold_members[f];
        std::sort(s.test.begin(), s.test.end());
        std::vector<std::size_t> rest;
        for (std::size_t o = 0; o < k; ++o)
            if (o != f) rest.insert(rest.end(), fold_members[o].begin(), fold_members[o].end());
        std::sort(rest.begin(), rest.end());
        if (valid_fraction > 0.0) {
            std::vector<int> rest_labels;
            rest_labels.reserve(rest.size());
            for (std::size_t i : rest) rest_labels.push_back(y[i]);
            SplitIndices inner = stratified_split(rest_labels, {1.0 - valid_fraction, valid_fraction},
                                                  child_seed(seed, "kfold.valid", f));
            for (std::size_t i : inner.train) s.train.push_back(rest[i]);
            for (std::size_t i : inner.test) s.valid.push_back(rest[i]);
        } else {
            s.train = std::move(rest);
        }
        folds.push_back(std::move(s));
    }
    return folds;
}

InducedImbalance induce_imbalance(const std::vector<int>& y, const ImbalanceSpec& spec) {
    auto by_class = indices_by_class(y);
    const std::size_t majority = by_class[0].size();
    const std::size_t minority = by_class[1].size();
    if (minority == 0) throw ConfigError("induce_imbalance: no minority samples");
    const double current_ir = static_cast<double>(majority) / static_cast<double>(minority);
    if (spec.target_ir < current_ir - 1e-9)
        throw ConfigError("induce_imbalance: target IR " + std::to_string(spec.target_ir) +
                          " below current IR " + std::to_string(current_ir));

    const std::size_t keep = std::min(
        minority, static_cast<std::size_t>(
                      std::ceil(static_cast<double>(majority) / spec.target_ir)));

    Rng rng(spec.seed);
    std::vector<std::size_t> pool = by_class[1];
    rng.shuffle(pool);

    InducedImbalance out;
    out.withheld_minority.assign(pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end());
    std::sort(out.withheld_minority.begin(), out.withheld_minority.end());

    std::vector<char> withheld(y.size(), 0);
    for (std::size_t i : out.withheld_minority) withheld[i] = 1;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (!withheld[i]) out.retained.push_back(i);
    return out;
}

}  // namespace metaug
