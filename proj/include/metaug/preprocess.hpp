#pragma once

#include <optional>
#include <vector>

#include "metaug/dataset.hpp"

namespace metaug {

// One-hot expansion, z-scoring of continuous columns with statistics from
// fit_on only, then optional PCA (covariance eigendecomposition, fit on
// fit_on rows). The returned dataset covers every raw row, transformed with
// the fit record.
ProcessedDataset preprocess(const RawDataset& raw, const std::vector<std::size_t>& fit_on,
                            std::optional<std::size_t> pca_dim = std::nullopt);

// Applies a stored transform to a subset of raw rows; reproduces preprocess
// output bit-exactly on the fit rows.
Tensor apply_transform(const TransformRecord& record, const RawDataset& raw,
                       const std::vector<std::size_t>& row_indices,
                       std::vector<std::string>* warnings = nullptr);

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Returns eigenvalues descending with matching orthonormal eigenvectors as
// columns; each eigenvector's largest-magnitude entry is made positive.
void symmetric_eigen(const Tensor& sym, std::vector<double>& eigenvalues, Tensor& eigenvectors);

}  // namespace metaug
