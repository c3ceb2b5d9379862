#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace metaug {

// Dense row-major f64 tensor. All graph ops work on rank-2 shapes; scalars
// are 1x1, row vectors 1xm.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
        : shape{rows, cols}, values(rows * cols, fill) {}

    static Tensor scalar(double v) {
        Tensor t(1, 1);
        t.values[0] = v;
        return t;
    }
    static Tensor zeros(std::size_t rows, std::size_t cols) { return Tensor(rows, cols, 0.0); }
    static Tensor full(std::size_t rows, std::size_t cols, double v) { return Tensor(rows, cols, v); }
    static Tensor identity(std::size_t n) {
        Tensor t(n, n);
        for (std::size_t i = 0; i < n; ++i) t.values[i * n + i] = 1.0;
        return t;
    }
    static Tensor from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? (shape.empty() ? 0 : 1) : shape[1]; }
    std::size_t numel() const { return values.size(); }
    bool is_scalar() const { return values.size() == 1; }

    double& at(std::size_t i, std::size_t j) { return values[i * cols() + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * cols() + j]; }
    double item() const { return values[0]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    bool all_finite() const;

    std::string shape_str() const;

    // Rows of this tensor selected by index, as a new tensor.
    Tensor gather_rows(const std::vector<std::size_t>& idx) const;
};

// Plain (graph-free) matrix product with optional transposes. Shared by the
// graph evaluator and by fast inference so both produce identical bits.
Tensor matmul_plain(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b);

// y += alpha * x, elementwise. Used by the optimizers.
void axpy(Tensor& y, const Tensor& x, double alpha);

double frobenius_norm(const Tensor& t);
double max_abs(const Tensor& t);
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace metaug
