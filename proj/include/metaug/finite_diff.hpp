#pragma once

#include <functional>

#include "metaug/tensor.hpp"

namespace metaug {

// Central-difference gradient of a scalar function: per coordinate,
// (f(x + h e_i) - f(x - h e_i)) / 2h. Test oracle for the graph backward
// passes; must stay independent of them.
Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f, const Tensor& x,
                        double h = 1e-5);

// max_i |a_i - b_i| / (max_i |b_i| + eps): the relative-error metric used by
// all gradient checks, normalized by the reference magnitude.
double rel_error(const Tensor& approx, const Tensor& reference);

}  // namespace metaug
