#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "metaug/tensor.hpp"

namespace metaug {

// The closed primitive set. MatMul carries transpose flags and Pow a constant
// exponent as node attributes; backward passes are lowered into this same set
// (plus constant leaves), which is what makes gradients themselves
// differentiable.
enum class Op : std::uint8_t {
    Leaf,        // variable or constant
    MatMul,      // (n x k) * (k x m), with optional transposes
    Add,         // same shape, or (n x m) + (1 x m) broadcast over rows
    Mul,         // elementwise, same shape
    Relu,
    Tanh,
    Sigmoid,
    Log,
    Pow,         // elementwise x^p, p a constant attribute
    Mean,        // full reduction to 1x1
    Sum,         // full reduction to 1x1
    ConcatRows,  // stack two matrices with equal column counts
};

const char* op_name(Op op);

struct VarId {
    std::int32_t index = -1;
    bool valid() const { return index >= 0; }
};

// Define-by-run computation graph. Nodes are appended with their inputs
// strictly earlier in the list and their output tensor evaluated eagerly.
// backward() with retain_graph=true records every gradient expression as new
// graph nodes, so returned gradients can be differentiated again; with
// retain_graph=false the identical expression sequence is evaluated into
// scratch storage instead.  Single-threaded; one graph per training step.
class Graph {
public:
    struct Node {
        Op kind = Op::Leaf;
        std::int32_t a = -1;
        std::int32_t b = -1;
        double attr = 0.0;   // Pow exponent
        bool trans_a = false;
        bool trans_b = false;
        bool is_variable = false;  // differentiable leaf
        bool requires_grad = false;
        Tensor value;
    };

    // Differentiable leaf. Values must be finite.
    VarId variable(Tensor t);
    // Non-differentiable leaf.
    VarId constant(Tensor t);
    VarId constant_scalar(double v) { return constant(Tensor::scalar(v)); }
    VarId constant_full(std::size_t rows, std::size_t cols, double v) {
        return constant(Tensor::full(rows, cols, v));
    }

    VarId matmul(VarId a, VarId b, bool trans_a = false, bool trans_b = false);
    VarId add(VarId a, VarId b);
    VarId mul(VarId a, VarId b);
    VarId relu(VarId a);
    VarId tanh(VarId a);
    VarId sigmoid(VarId a);
    VarId log(VarId a);
    VarId pow(VarId a, double exponent);
    VarId mean(VarId a);
    VarId sum(VarId a);
    VarId concat_rows(VarId a, VarId b);

    // Generic dispatch used by the typed wrappers above (and by tests that
    // drive the op set by kind).
    VarId apply(Op kind, std::span<const VarId> inputs, double attr = 0.0,
                bool trans_a = false, bool trans_b = false);

    // Composite sugar, lowered to primitive nodes: k*x + c elementwise.
    VarId affine(VarId x, double k, double c);
    // Composite sugar: x * full(k).
    VarId scale(VarId x, double k);

    const Tensor& value(VarId id) const;
    bool is_leaf(VarId id) const;
    bool is_variable(VarId id) const;
    std::size_t node_count() const { return nodes_.size(); }

    // d(root)/d(wrt) for a scalar-shaped root. Each wrt must be a variable
    // leaf; a leaf unreachable from root yields a zero tensor. With
    // retain_graph=true the gradients are appended to the graph and the
    // returned ids may be differentiated again. wrt_any_node lifts the leaf
    // restriction (the adjoint of an interior node is its total derivative),
    // which unrolled multi-step updates need.
    std::vector<Tensor> backward(VarId root, std::span<const VarId> wrt,
                                 bool wrt_any_node = false);
    std::vector<VarId> backward_retained(VarId root, std::span<const VarId> wrt,
                                         bool wrt_any_node = false);

    // d/d(outer_wrt) of <grad_{inner_wrt} root, probe>. With
    // outer_wrt == inner_wrt this is a Hessian-vector product.
    Tensor grad_of_grad(VarId root, VarId inner_wrt, const Tensor& probe, VarId outer_wrt);

private:
    std::vector<Node> nodes_;

    const Node& node(VarId id) const;
    template <class Emitter>
    void backward_impl(VarId root, std::span<const VarId> wrt, Emitter& em,
                       std::vector<std::int64_t>& adjoint_of, bool wrt_any_node);
};

}  // namespace metaug
