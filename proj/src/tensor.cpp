#include "metaug/tensor.hpp"

#include <cmath>
#include <cstdlib>

#include "metaug/error.hpp"

namespace metaug {

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Tensor(0, 0);
    Tensor t(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw ShapeError("from_rows: ragged input at row " + std::to_string(i));
        for (std::size_t j = 0; j < rows[i].size(); ++j) t.at(i, j) = rows[i][j];
    }
    return t;
}

bool Tensor::all_finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor Tensor::gather_rows(const std::vector<std::size_t>& idx) const {
    Tensor out(idx.size(), cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < cols(); ++j) out.at(i, j) = at(idx[i], j);
    return out;
}

Tensor matmul_plain(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b) {
    const std::size_t ar = trans_a ? a.cols() : a.rows();
    const std::size_t ac = trans_a ? a.rows() : a.cols();
    const std::size_t br = trans_b ? b.cols() : b.rows();
    const std::size_t bc = trans_b ? b.rows() : b.cols();
    if (ac != br)
        throw ShapeError("matmul: inner dimensions differ, " + a.shape_str() +
                         (trans_a ? "^T" : "") + " * " + b.shape_str() + (trans_b ? "^T" : ""));
    Tensor out(ar, bc);
    const double* av = a.values.data();
    const double* bv = b.values.data();
    double* ov = out.values.data();
    const std::size_t a_rs = a.cols();  // row stride of a's storage
    const std::size_t b_rs = b.cols();
    // i-k-j ordering keeps the inner loop contiguous for the common
    // no-transpose case; the transposed variants index accordingly.
    for (std::size_t i = 0; i < ar; ++i) {
        double* orow = ov + i * bc;
        for (std::size_t k = 0; k < ac; ++k) {
            const double aik = trans_a ? av[k * a_rs + i] : av[i * a_rs + k];
            if (aik == 0.0) continue;
            if (!trans_b) {
                const double* brow = bv + k * b_rs;
                for (std::size_t j = 0; j < bc; ++j) orow[j] += aik * brow[j];
            } else {
                for (std::size_t j = 0; j < bc; ++j) orow[j] += aik * bv[j * b_rs + k];
            }
        }
    }
    return out;
}

void axpy(Tensor& y, const Tensor& x, double alpha) {
    if (!y.same_shape(x))
        throw ShapeError("axpy: shape mismatch " + y.shape_str() + " vs " + x.shape_str());
    for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += alpha * x.values[i];
}

double frobenius_norm(const Tensor& t) {
    double s = 0.0;
    for (double v : t.values) s += v * v;
    return std::sqrt(s);
}

double max_abs(const Tensor& t) {
    double m = 0.0;
    for (double v : t.values) m = std::max(m, std::fabs(v));
    return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b))
        throw ShapeError("max_abs_diff: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        m = std::max(m, std::fabs(a.values[i] - b.values[i]));
    return m;
}

}  // namespace metaug
