#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "metaug/csv.hpp"
#include "metaug/error.hpp"
#include "metaug/keel.hpp"
#include "metaug/preprocess.hpp"
#include "metaug/rng.hpp"
#include "metaug/split.hpp"
#include "test_support.hpp"

using namespace metaug;

TEST_CASE("keel: bundled abalone19 matches the published roster") {
    RawDataset ds = load_keel_dat(testing::data_dir() + "/keel/abalone19.dat");
    CHECK(ds.size() == 4174);
    CHECK(ds.columns.size() == 8);
    CHECK(ds.imbalance_ratio() == doctest::Approx(129.44).epsilon(1e-3));
    CHECK(ds.columns[0].kind == ColumnKind::Categorical);
    CHECK(ds.columns[0].categories.size() == 3);
    CHECK(ds.positive_token == "positive");
}

TEST_CASE("keel: bundled yeast-2_vs_4 matches the published roster") {
    RawDataset ds = load_keel_dat(testing::data_dir() + "/keel/yeast-2_vs_4.dat");
    CHECK(ds.size() == 514);
    CHECK(ds.columns.size() == 8);
    CHECK(ds.imbalance_ratio() == doctest::Approx(9.08).epsilon(1e-3));
}

TEST_CASE("keel: constructed fixture with a categorical attribute") {
    const std::string text =
        "@relation tiny\n"
        "@attribute Color {red, blue}\n"
        "@attribute Size real [0.0, 10.0]\n"
        "@attribute Class {positive,negative}\n"
        "@data\n"
        "red, 1.5, negative\n"
        "blue, 2.5, positive\n"
        "red, 0.5, negative\n";
    RawDataset ds = parse_keel_dat(text, "tiny");
    CHECK(ds.size() == 3);
    REQUIRE(ds.columns.size() == 2);
    CHECK(ds.columns[0].kind == ColumnKind::Categorical);
    CHECK(ds.columns[0].categories == std::vector<std::string>{"red", "blue"});
    CHECK(ds.labels == std::vector<int>{0, 1, 0});
    CHECK(ds.rows[1][0] == 1.0);  // blue
}

TEST_CASE("keel: malformed input errors carry the line number") {
    SUBCASE("row arity mismatch") {
        const std::string text =
            "@relation bad\n@attribute A real\n@attribute Class {positive,negative}\n@data\n"
            "1.0, positive\n1.0\n";
        try {
            parse_keel_dat(text, "bad");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("line 6") != std::string::npos);
        }
    }
    SUBCASE("unknown categorical token") {
        const std::string text =
            "@relation bad\n@attribute A {x,y}\n@attribute Class {positive,negative}\n@data\n"
            "z, positive\n";
        CHECK_THROWS_AS(parse_keel_dat(text, "bad"), ParseError);
    }
    SUBCASE("missing @data") {
        CHECK_THROWS_AS(parse_keel_dat("@relation bad\n@attribute A real\n", "bad"), ParseError);
    }
}

TEST_CASE("csv loader") {
    CsvSchemaSpec spec;
    spec.label_column = "income";
    spec.positive_token = "high";
    spec.categorical_columns = {"job"};

    SUBCASE("basic parse with missing rows dropped") {
        const std::string text =
            "age,job,income\n"
            "30,engineer,low\n"
            "40,?,high\n"
            "50,teacher,high\n"
            "20,engineer,low\n";
        RawDataset ds = parse_csv(text, spec, "toy");
        CHECK(ds.size() == 3);
        CHECK(ds.dropped_rows == 1);
        CHECK(ds.labels == std::vector<int>{0, 1, 0});
        CHECK(ds.columns[0].kind == ColumnKind::Continuous);
        CHECK(ds.columns[1].kind == ColumnKind::Categorical);
        CHECK(ds.minority_count() == 1);
    }
    SUBCASE("empty file errors") {
        CHECK_THROWS_AS(parse_csv("", spec, "empty"), ParseError);
        CHECK_THROWS_AS(parse_csv("age,job,income\n", spec, "headeronly"), ParseError);
    }
    SUBCASE("single-class file errors") {
        const std::string text = "age,job,income\n30,engineer,low\n40,teacher,low\n";
        CHECK_THROWS_AS(parse_csv(text, spec, "oneclass"), ParseError);
    }
}

namespace {

RawDataset synthetic_raw(std::size_t n, std::uint64_t seed) {
    RawDataset ds;
    ds.name = "synthetic";
    ds.categories_from_schema = true;
    ColumnSpec c0{"f0", ColumnKind::Continuous, {}};
    ColumnSpec c1{"cat", ColumnKind::Categorical, {"a", "b", "c"}};
    ColumnSpec c2{"f1", ColumnKind::Continuous, {}};
    ds.columns = {c0, c1, c2};
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        ds.rows.push_back({rng.uniform(-4.0, 3.0), static_cast<double>(rng.uniform_int(3)),
                           rng.uniform(10.0, 20.0)});
        ds.labels.push_back(rng.uniform_int(5) == 0 ? 1 : 0);
    }
    if (ds.minority_count() == 0) ds.labels[0] = 1;
    return ds;
}

}  // namespace

TEST_CASE("preprocess: one-hot blocks, z-scoring, idempotent transform") {
    RawDataset raw = synthetic_raw(40, 2);
    std::vector<std::size_t> fit(30);
    std::iota(fit.begin(), fit.end(), 0);
    ProcessedDataset pd = preprocess(raw, fit);

    // encoded width: 1 continuous + 3 one-hot + 1 continuous
    CHECK(pd.X.cols() == 5);
    for (std::size_t r = 0; r < pd.X.rows(); ++r) {
        double block = pd.X.at(r, 1) + pd.X.at(r, 2) + pd.X.at(r, 3);
        CHECK(block == 1.0);
    }

    // fit-row statistics of continuous columns
    double mean0 = 0, var0 = 0;
    for (std::size_t i : fit) mean0 += pd.X.at(i, 0);
    mean0 /= static_cast<double>(fit.size());
    for (std::size_t i : fit) var0 += (pd.X.at(i, 0) - mean0) * (pd.X.at(i, 0) - mean0);
    var0 /= static_cast<double>(fit.size());
    CHECK(std::fabs(mean0) < 1e-12);
    CHECK(var0 == doctest::Approx(1.0).epsilon(1e-9));

    // applying the stored transform reproduces X bit-exactly
    std::vector<std::size_t> all(raw.size());
    std::iota(all.begin(), all.end(), 0);
    Tensor again = apply_transform(pd.transform, raw, all);
    CHECK(max_abs_diff(again, pd.X) == 0.0);
}

TEST_CASE("preprocess: zero-variance column is a warned no-op") {
    RawDataset raw = synthetic_raw(10, 3);
    for (auto& row : raw.rows) row[0] = 7.0;
    std::vector<std::size_t> fit(10);
    std::iota(fit.begin(), fit.end(), 0);
    ProcessedDataset pd = preprocess(raw, fit);
    CHECK(!pd.transform.warnings.empty());
    for (std::size_t r = 0; r < pd.X.rows(); ++r) CHECK(pd.X.at(r, 0) == 0.0);
}

TEST_CASE("preprocess: unseen csv category becomes an all-zero block") {
    RawDataset raw = synthetic_raw(12, 4);
    raw.categories_from_schema = false;
    // fit rows only see categories of rows 0..7; force row 11 to a category
    // absent there
    for (std::size_t i = 0; i < 8; ++i) raw.rows[i][1] = static_cast<double>(i % 2);  // a, b only
    raw.rows[11][1] = 2.0;                                                            // c
    std::vector<std::size_t> fit(8);
    std::iota(fit.begin(), fit.end(), 0);
    ProcessedDataset pd = preprocess(raw, fit);
    CHECK(pd.X.cols() == 4);  // c dropped from the block
    double block = 0;
    for (std::size_t c = 1; c <= 2; ++c) block += pd.X.at(11, c);
    CHECK(block == 0.0);
    bool warned = false;
    for (const auto& w : pd.transform.warnings) warned = warned || w.find("unseen") != std::string::npos;
    CHECK(warned);
}

TEST_CASE("pca: orthonormal basis, ordered spectrum, exact full-rank reconstruction") {
    RawDataset raw = synthetic_raw(60, 5);
    std::vector<std::size_t> fit(60);
    std::iota(fit.begin(), fit.end(), 0);

    SUBCASE("full dimension keeps all variance") {
        ProcessedDataset pd = preprocess(raw, fit, 5);
        const PcaModel& pca = *pd.transform.pca;
        // Gram matrix of the basis is the identity.
        Tensor gram = matmul_plain(pca.basis, pca.basis, true, false);
        CHECK(max_abs_diff(gram, Tensor::identity(5)) < 1e-10);
        for (std::size_t i = 1; i < pca.eigenvalues.size(); ++i)
            CHECK(pca.eigenvalues[i] <= pca.eigenvalues[i - 1] + 1e-12);

        // Reconstruction through the full basis is exact.
        ProcessedDataset flat = preprocess(raw, fit);
        Tensor centered = flat.X;
        for (std::size_t r = 0; r < centered.rows(); ++r)
            for (std::size_t c = 0; c < 5; ++c) centered.at(r, c) -= pca.center[c];
        Tensor recon = matmul_plain(pd.X, pca.basis, false, true);
        CHECK(max_abs_diff(recon, centered) < 1e-9);
    }
    SUBCASE("reduced dimension has the requested width") {
        ProcessedDataset pd = preprocess(raw, fit, 2);
        CHECK(pd.X.cols() == 2);
        CHECK(pd.transform.pca->eigenvalues.size() == 2);
    }
    SUBCASE("pca_dim beyond the encoded width is rejected") {
        CHECK_THROWS_AS(preprocess(raw, fit, 6), ConfigError);
    }
}

TEST_CASE("stratified_split allocations") {
    SUBCASE("8 zeros and 2 ones at 80/20") {
        std::vector<int> y = {0, 0, 0, 0, 0, 0, 0, 0, 1, 1};
        SplitIndices s = stratified_split(y, {0.8, 0.2}, 7);
        std::size_t test_zeros = 0, test_ones = 0;
        for (std::size_t i : s.test) (y[i] == 0 ? test_zeros : test_ones)++;
        CHECK(test_zeros == 2);
        CHECK(test_ones <= 1);
        CHECK(s.train.size() + s.test.size() == y.size());
    }
    SUBCASE("single fraction keeps everything") {
        std::vector<int> y = {0, 1, 0, 1};
        SplitIndices s = stratified_split(y, {1.0}, 3);
        CHECK(s.train.size() == 4);
    }
    SUBCASE("three fractions fill train/valid/test disjointly") {
        std::vector<int> y(100, 0);
        for (std::size_t i = 0; i < 20; ++i) y[i] = 1;
        SplitIndices s = stratified_split(y, {0.6, 0.2, 0.2}, 1);
        std::set<std::size_t> seen;
        for (std::size_t i : s.train) seen.insert(i);
        for (std::size_t i : s.valid) seen.insert(i);
        for (std::size_t i : s.test) seen.insert(i);
        CHECK(seen.size() == 100);
        CHECK(s.train.size() == 60);
        CHECK(s.valid.size() == 20);
        CHECK(s.test.size() == 20);
    }
    SUBCASE("per-class counts are permutation invariant") {
        Rng rng(12);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<int> y(30);
            for (auto& v : y) v = rng.uniform_int(2) ? 1 : 0;
            std::size_t ones = 0;
            for (int v : y) ones += v;
            if (ones < 2 || ones > 28) continue;
            SplitIndices a = stratified_split(y, {0.8, 0.2}, 5);
            std::vector<int> yp = y;
            rng.shuffle(yp);
            SplitIndices b = stratified_split(yp, {0.8, 0.2}, 99);
            auto ones_in = [](const std::vector<std::size_t>& idx, const std::vector<int>& labels) {
                std::size_t k = 0;
                for (std::size_t i : idx) k += labels[i] == 1;
                return k;
            };
            CHECK(ones_in(a.test, y) == ones_in(b.test, yp));
            CHECK(a.test.size() == b.test.size());
        }
    }
    SUBCASE("class too small errors") {
        std::vector<int> y = {0, 0, 0, 1};
        CHECK_THROWS_AS(stratified_split(y, {0.5, 0.3, 0.2}, 1), ConfigError);
    }
}

TEST_CASE("stratified_kfold properties") {
    SUBCASE("12 majority + 4 minority, k=4") {
        std::vector<int> y(16, 0);
        for (std::size_t i = 0; i < 4; ++i) y[i] = 1;
        auto folds = stratified_kfold(y, 4, 11);
        REQUIRE(folds.size() == 4);
        std::set<std::size_t> tested;
        for (const auto& f : folds) {
            std::size_t maj = 0, min = 0;
            for (std::size_t i : f.test) (y[i] == 0 ? maj : min)++;
            CHECK(maj == 3);
            CHECK(min == 1);
            for (std::size_t i : f.test) tested.insert(i);
            CHECK(f.train.size() == 12);
        }
        CHECK(tested.size() == 16);
    }
    SUBCASE("fold ratios on the bundled yeast-2_vs_4 deviate by at most one sample") {
        RawDataset ds = load_keel_dat(testing::data_dir() + "/keel/yeast-2_vs_4.dat");
        auto folds = stratified_kfold(ds.labels, 4, 3);
        const std::size_t total_min = ds.minority_count();
        for (const auto& f : folds) {
            std::size_t mins = 0;
            for (std::size_t i : f.test) mins += ds.labels[i] == 1;
            const double expected = static_cast<double>(total_min) / 4.0;
            CHECK(std::fabs(static_cast<double>(mins) - expected) <= 1.0);
        }
    }
    SUBCASE("valid fraction carves a stratified slice of the non-test rows") {
        std::vector<int> y(40, 0);
        for (std::size_t i = 0; i < 8; ++i) y[i] = 1;
        auto folds = stratified_kfold(y, 4, 7, 0.25);
        for (const auto& f : folds) {
            CHECK(f.valid.size() > 0);
            CHECK(f.train.size() + f.valid.size() + f.test.size() == 40);
            std::set<std::size_t> all;
            for (std::size_t i : f.train) all.insert(i);
            for (std::size_t i : f.valid) all.insert(i);
            for (std::size_t i : f.test) all.insert(i);
            CHECK(all.size() == 40);
        }
    }
    SUBCASE("minority smaller than k errors") {
        std::vector<int> y(10, 0);
        y[0] = 1;
        CHECK_THROWS_AS(stratified_kfold(y, 4, 1), ConfigError);
    }
}

TEST_CASE("induce_imbalance") {
    SUBCASE("balanced adult-sized labels at target 50") {
        std::vector<int> y(22416, 0);
        for (std::size_t i = 0; i < 11208; ++i) y[i] = 1;
        InducedImbalance ind = induce_imbalance(y, {50.0, 5});
        std::size_t kept_min = 0;
        for (std::size_t i : ind.retained) kept_min += y[i] == 1;
        CHECK(kept_min == 225);  // ceil(11208 / 50)
        CHECK(ind.retained.size() == 11208 + 225);
        CHECK(ind.withheld_minority.size() == 11208 - 225);
        const double realized = 11208.0 / static_cast<double>(kept_min);
        CHECK(std::fabs(11208.0 / realized - 11208.0 / 50.0) <= 1.0);
    }
    SUBCASE("realized IR within one minority sample of every target") {
        std::vector<int> y(21000, 0);
        for (std::size_t i = 0; i < 10500; ++i) y[i] = 1;
        for (double target : {50.0, 100.0, 200.0}) {
            InducedImbalance ind = induce_imbalance(y, {target, 3});
            std::size_t kept = 0;
            for (std::size_t i : ind.retained) kept += y[i] == 1;
            const double ir = 10500.0 / static_cast<double>(kept);
            const double ir_minus = 10500.0 / static_cast<double>(kept + 1);
            CHECK(ir_minus <= target);
            CHECK(ir >= target * 0.99);
        }
    }
    SUBCASE("target equal to the current IR withholds nothing") {
        std::vector<int> y = {0, 0, 0, 0, 1, 1};
        InducedImbalance ind = induce_imbalance(y, {2.0, 1});
        CHECK(ind.withheld_minority.empty());
        CHECK(ind.retained.size() == 6);
    }
    SUBCASE("retained and withheld partition the minority") {
        std::vector<int> y(300, 0);
        for (std::size_t i = 0; i < 60; ++i) y[i * 5] = 1;
        InducedImbalance ind = induce_imbalance(y, {20.0, 9});
        std::set<std::size_t> minority;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == 1) minority.insert(i);
        std::set<std::size_t> covered;
        for (std::size_t i : ind.retained)
            if (y[i] == 1) covered.insert(i);
        for (std::size_t i : ind.withheld_minority) {
            CHECK(!covered.count(i));
            covered.insert(i);
        }
        CHECK(covered == minority);
    }
    SUBCASE("target below the current IR errors") {
        std::vector<int> y = {0, 0, 0, 0, 0, 0, 1};
        CHECK_THROWS_AS(induce_imbalance(y, {2.0, 0}), ConfigError);
    }
}
