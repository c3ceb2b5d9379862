#include "metaug/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metaug/error.hpp"

namespace metaug {

std::size_t TransformRecord::encoded_width() const {
    std::size_t w = 0;
    std::size_t cat = 0;
    for (const ColumnSpec& c : columns)
        w += c.kind == ColumnKind::Categorical ? onehot_categories[cat++].size() : 1;
    return w;
}

std::size_t TransformRecord::output_width() const {
    return pca ? pca->basis.cols() : encoded_width();
}

std::size_t ProcessedDataset::minority_count() const {
    std::size_t n = 0;
    for (int v : y) n += v == 1;
    return n;
}
std::size_t ProcessedDataset::majority_count() const { return y.size() - minority_count(); }
double ProcessedDataset::imbalance_ratio() const {
    const std::size_t m = minority_count();
    return m == 0 ? 0.0 : static_cast<double>(majority_count()) / static_cast<double>(m);
}
Tensor ProcessedDataset::labels_tensor() const {
    Tensor t(y.size(), 1);
    for (std::size_t i = 0; i < y.size(); ++i) t.values[i] = y[i];
    return t;
}
ProcessedDataset ProcessedDataset::subset(const std::vector<std::size_t>& idx) const {
    ProcessedDataset out;
    out.X = X.gather_rows(idx);
    out.y.reserve(idx.size());
    for (std::size_t i : idx) out.y.push_back(y[i]);
    out.transform = transform;
    out.source_name = source_name;
    return out;
}

void symmetric_eigen(const Tensor& sym, std::vector<double>& eigenvalues, Tensor& eigenvectors) {
    const std::size_t n = sym.rows();
    if (sym.cols() != n) throw ShapeError("symmetric_eigen: matrix not square");
    Tensor a = sym;
    Tensor v = Tensor::identity(n);

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a.at(i, j) * a.at(i, j);
        if (off < 1e-22) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double app = a.at(p, p), aqq = a.at(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a.at(k, p), akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a.at(p, k), aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v.at(k, p), vkq = v.at(k, q);
                    v.at(k, p) = c * vkp - s * vkq;
                    v.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = a.at(i, i);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return diag[x] > diag[y]; });

    eigenvalues.assign(n, 0.0);
    eigenvectors = Tensor(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        eigenvalues[j] = diag[src];
        // Sign convention: largest-magnitude component positive.
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::fabs(v.at(i, src)) > best) {
                best = std::fabs(v.at(i, src));
                arg = i;
            }
        }
        const double sign = v.at(arg, src) >= 0.0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < n; ++i) eigenvectors.at(i, j) = sign * v.at(i, src);
    }
}

namespace {

// Encoded row (one-hot + z-score) into `out` using the fitted record.
void encode_row(const TransformRecord& rec, const std::vector<double>& raw_row, double* out,
                std::vector<std::string>* warnings) {
    std::size_t pos = 0;
    std::size_t cat = 0;
    for (std::size_t c = 0; c < rec.columns.size(); ++c) {
        const ColumnSpec& col = rec.columns[c];
        if (col.kind == ColumnKind::Categorical) {
            const auto& cats = rec.onehot_categories[cat++];
            const auto value = static_cast<std::size_t>(raw_row[c]);
            bool hit = false;
            for (std::size_t k = 0; k < cats.size(); ++k) {
                const bool on = cats[k] == value;
                out[pos + k] = on ? 1.0 : 0.0;
                hit = hit || on;
            }
            if (!hit && warnings)
                warnings->push_back("column " + col.name +
                                    ": category unseen in fit rows; encoded as all-zero block");
            pos += cats.size();
        } else {
            out[pos++] = (raw_row[c] - rec.mean[c]) / rec.stddev[c];
        }
    }
}

}  // namespace

Tensor apply_transform(const TransformRecord& record, const RawDataset& raw,
                       const std::vector<std::size_t>& row_indices,
                       std::vector<std::string>* warnings) {
    const std::size_t width = record.encoded_width();
    Tensor encoded(row_indices.size(), width);
    for (std::size_t r = 0; r < row_indices.size(); ++r)
        encode_row(record, raw.rows[row_indices[r]], &encoded.values[r * width], warnings);
    if (!record.pca) return encoded;

    const PcaModel& pca = *record.pca;
    Tensor centered = encoded;
    for (std::size_t r = 0; r < centered.rows(); ++r)
        for (std::size_t c = 0; c < width; ++c) centered.at(r, c) -= pca.center[c];
    return matmul_plain(centered, pca.basis, false, false);
}

ProcessedDataset preprocess(const RawDataset& raw, const std::vector<std::size_t>& fit_on,
                            std::optional<std::size_t> pca_dim) {
    if (fit_on.empty()) throw ConfigError("preprocess: fit_on must be nonempty");
    for (std::size_t i : fit_on)
        if (i >= raw.rows.size()) throw ConfigError("preprocess: fit index out of range");

    TransformRecord rec;
    rec.columns = raw.columns;
    rec.mean.assign(raw.columns.size(), 0.0);
    rec.stddev.assign(raw.columns.size(), 1.0);

    for (std::size_t c = 0; c < raw.columns.size(); ++c) {
        const ColumnSpec& col = raw.columns[c];
        if (col.kind == ColumnKind::Categorical) {
            std::vector<std::size_t> cats;
            if (raw.categories_from_schema) {
                cats.resize(col.categories.size());
                std::iota(cats.begin(), cats.end(), 0);
            } else {
                std::vector<char> seen(col.categories.size(), 0);
                for (std::size_t i : fit_on) seen[static_cast<std::size_t>(raw.rows[i][c])] = 1;
                for (std::size_t k = 0; k < seen.size(); ++k)
                    if (seen[k]) cats.push_back(k);
            }
            rec.onehot_categories.push_back(std::move(cats));
        } else {
            double sum = 0.0;
            for (std::size_t i : fit_on) sum += raw.rows[i][c];
            const double mean = sum / static_cast<double>(fit_on.size());
            double ss = 0.0;
            for (std::size_t i : fit_on) {
                const double d = raw.rows[i][c] - mean;
                ss += d * d;
            }
            double sd = std::sqrt(ss / static_cast<double>(fit_on.size()));
            if (sd == 0.0) {
                sd = 1.0;
                rec.warnings.push_back("column " + col.name +
                                       ": zero variance on fit rows; scaling disabled");
            }
            rec.mean[c] = mean;
            rec.stddev[c] = sd;
        }
    }

    if (pca_dim) {
        const std::size_t width = rec.encoded_width();
        if (*pca_dim == 0 || *pca_dim > width)
            throw ConfigError("preprocess: pca_dim must be in [1, encoded width " +
                              std::to_string(width) + "]");
        Tensor fit_encoded(fit_on.size(), width);
        for (std::size_t r = 0; r < fit_on.size(); ++r)
            encode_row(rec, raw.rows[fit_on[r]], &fit_encoded.values[r * width], nullptr);

        PcaModel model;
        model.center.assign(width, 0.0);
        for (std::size_t r = 0; r < fit_encoded.rows(); ++r)
            for (std::size_t c = 0; c < width; ++c) model.center[c] += fit_encoded.at(r, c);
        for (double& v : model.center) v /= static_cast<double>(fit_encoded.rows());
        for (std::size_t r = 0; r < fit_encoded.rows(); ++r)
            for (std::size_t c = 0; c < width; ++c) fit_encoded.at(r, c) -= model.center[c];

        Tensor cov = matmul_plain(fit_encoded, fit_encoded, true, false);
        const double denom = fit_on.size() > 1 ? static_cast<double>(fit_on.size() - 1) : 1.0;
        for (double& v : cov.values) v /= denom;

        std::vector<double> eigenvalues;
        Tensor vectors;
        symmetric_eigen(cov, eigenvalues, vectors);

        model.basis = Tensor(width, *pca_dim);
        model.eigenvalues.assign(eigenvalues.begin(),
                                 eigenvalues.begin() + static_cast<std::ptrdiff_t>(*pca_dim));
        for (std::size_t i = 0; i < width; ++i)
            for (std::size_t j = 0; j < *pca_dim; ++j) model.basis.at(i, j) = vectors.at(i, j);
        rec.pca = std::move(model);
    }

    ProcessedDataset out;
    out.source_name = raw.name;
    out.transform = std::move(rec);
    std::vector<std::size_t> all(raw.rows.size());
    std::iota(all.begin(), all.end(), 0);
    out.X = apply_transform(out.transform, raw, all, &out.transform.warnings);
    out.y = raw.labels;
    return out;
}

}  // namespace metaug
