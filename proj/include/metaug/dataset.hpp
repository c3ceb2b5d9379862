#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metaug/tensor.hpp"

namespace metaug {

enum class ColumnKind { Continuous, Categorical };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
    std::vector<std::string> categories;  // Categorical only

    std::optional<std::size_t> category_index(const std::string& token) const {
        for (std::size_t i = 0; i < categories.size(); ++i)
            if (categories[i] == token) return i;
        return std::nullopt;
    }
};

// Mixed-typed rows with schema. Continuous cells hold values, categorical
// cells hold the category index. Labels are 0 for the majority class and 1
// for the minority (smaller) class.
struct RawDataset {
    std::string name;
    std::vector<ColumnSpec> columns;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string positive_token;  // source token mapped to label 1
    std::string negative_token;
    // True when the categorical value sets come from a declared schema (KEEL
    // header); false when inferred from data (CSV), in which case one-hot
    // encoding uses the fit rows only.
    bool categories_from_schema = false;
    std::size_t dropped_rows = 0;

    std::size_t size() const { return rows.size(); }
    std::size_t minority_count() const;
    std::size_t majority_count() const;
    double imbalance_ratio() const;
};

struct PcaModel {
    std::vector<double> center;        // encoded width
    Tensor basis;                      // encoded width x k, orthonormal columns
    std::vector<double> eigenvalues;   // descending
};

// Everything needed to re-apply the fitted preprocessing to new rows.
struct TransformRecord {
    std::vector<ColumnSpec> columns;
    std::vector<double> mean;  // per input column; 0 for categorical
    std::vector<double> stddev;
    // Per categorical column: category indices present in the fit rows, in
    // schema order; defines that column's one-hot block.
    std::vector<std::vector<std::size_t>> onehot_categories;
    std::optional<PcaModel> pca;
    std::vector<std::string> warnings;

    std::size_t encoded_width() const;
    std::size_t output_width() const;
};

struct ProcessedDataset {
    Tensor X;
    std::vector<int> y;
    TransformRecord transform;
    std::string source_name;

    std::size_t size() const { return X.rows(); }
    std::size_t minority_count() const;
    std::size_t majority_count() const;
    double imbalance_ratio() const;
    Tensor labels_tensor() const;  // n x 1 of 0/1
    ProcessedDataset subset(const std::vector<std::size_t>& idx) const;
};

}  // namespace metaug
