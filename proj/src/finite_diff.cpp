#include "metaug/finite_diff.hpp"

#include <cmath>

#include "metaug/error.hpp"

namespace metaug {

Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f, const Tensor& x, double h) {
    if (h <= 0.0) throw Error("finite_diff_grad: h must be positive");
    Tensor grad(x.rows(), x.cols());
    Tensor probe = x;
    for (std::size_t i = 0; i < x.values.size(); ++i) {
        const double saved = probe.values[i];
        probe.values[i] = saved + h;
        const double up = f(probe);
        probe.values[i] = saved - h;
        const double down = f(probe);
        probe.values[i] = saved;
        if (!std::isfinite(up) || !std::isfinite(down))
            throw NumericError("finite_diff_grad: non-finite evaluation at coordinate " +
                               std::to_string(i));
        grad.values[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

double rel_error(const Tensor& approx, const Tensor& reference) {
    return max_abs_diff(approx, reference) / (max_abs(reference) + 1e-12);
}

}  // namespace metaug
