#include "metaug/graph.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include "metaug/error.hpp"

namespace metaug {

const char* op_name(Op op) {
    switch (op) {
        case Op::Leaf: return "leaf";
        case Op::MatMul: return "matmul";
        case Op::Add: return "add";
        case Op::Mul: return "mul";
        case Op::Relu: return "relu";
        case Op::Tanh: return "tanh";
        case Op::Sigmoid: return "sigmoid";
        case Op::Log: return "log";
        case Op::Pow: return "pow";
        case Op::Mean: return "mean";
        case Op::Sum: return "sum";
        case Op::ConcatRows: return "concat_rows";
    }
    return "?";
}

namespace {

Tensor eval_op(Op kind, const Tensor& a, const Tensor* b, double attr, bool ta, bool tb) {
    switch (kind) {
        case Op::MatMul:
            return matmul_plain(a, *b, ta, tb);
        case Op::Add: {
            if (a.same_shape(*b)) {
                Tensor out = a;
                for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b->values[i];
                return out;
            }
            if (b->rows() == 1 && b->cols() == a.cols()) {
                Tensor out = a;
                for (std::size_t i = 0; i < a.rows(); ++i)
                    for (std::size_t j = 0; j < a.cols(); ++j) out.at(i, j) += b->values[j];
                return out;
            }
            throw ShapeError("add: incompatible shapes " + a.shape_str() + " + " + b->shape_str());
        }
        case Op::Mul: {
            if (!a.same_shape(*b))
                throw ShapeError("mul: shape mismatch " + a.shape_str() + " vs " + b->shape_str());
            Tensor out = a;
            for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= b->values[i];
            return out;
        }
        case Op::Relu: {
            Tensor out = a;
            for (double& v : out.values) v = v > 0.0 ? v : 0.0;
            return out;
        }
        case Op::Tanh: {
            Tensor out = a;
            for (double& v : out.values) v = std::tanh(v);
            return out;
        }
        case Op::Sigmoid: {
            Tensor out = a;
            for (double& v : out.values) v = 1.0 / (1.0 + std::exp(-v));
            return out;
        }
        case Op::Log: {
            Tensor out = a;
            for (double& v : out.values) v = std::log(v);
            return out;
        }
        case Op::Pow: {
            Tensor out = a;
            for (double& v : out.values) v = std::pow(v, attr);
            return out;
        }
        case Op::Mean: {
            if (a.values.empty()) throw ShapeError("mean: empty tensor");
            double s = 0.0;
            for (double v : a.values) s += v;
            return Tensor::scalar(s / static_cast<double>(a.values.size()));
        }
        case Op::Sum: {
            double s = 0.0;
            for (double v : a.values) s += v;
            return Tensor::scalar(s);
        }
        case Op::ConcatRows: {
            if (a.cols() != b->cols())
                throw ShapeError("concat_rows: column mismatch " + a.shape_str() + " vs " +
                                 b->shape_str());
            Tensor out(a.rows() + b->rows(), a.cols());
            std::copy(a.values.begin(), a.values.end(), out.values.begin());
            std::copy(b->values.begin(), b->values.end(), out.values.begin() + a.values.size());
            return out;
        }
        case Op::Leaf:
            break;
    }
    throw Error("eval_op: leaf has no evaluation");
}

// Handles used during backward lowering: >= 0 addresses a graph node, < 0 a
// scratch slot (~h). The retained emitter appends graph nodes; the scratch
// emitter evaluates the identical expression sequence eagerly, so both modes
// perform the same arithmetic in the same order.
using Handle = std::int64_t;
constexpr Handle kNone = std::numeric_limits<Handle>::min();

}  // namespace

const Graph::Node& Graph::node(VarId id) const {
    if (!id.valid() || static_cast<std::size_t>(id.index) >= nodes_.size())
        throw Error("graph: invalid node id");
    return nodes_[static_cast<std::size_t>(id.index)];
}

VarId Graph::variable(Tensor t) {
    if (!t.all_finite()) throw NumericError("variable: non-finite initial values");
    Node n;
    n.kind = Op::Leaf;
    n.is_variable = true;
    n.requires_grad = true;
    n.value = std::move(t);
    nodes_.push_back(std::move(n));
    return VarId{static_cast<std::int32_t>(nodes_.size() - 1)};
}

VarId Graph::constant(Tensor t) {
    if (!t.all_finite()) throw NumericError("constant: non-finite values");
    Node n;
    n.kind = Op::Leaf;
    n.value = std::move(t);
    nodes_.push_back(std::move(n));
    return VarId{static_cast<std::int32_t>(nodes_.size() - 1)};
}

VarId Graph::apply(Op kind, std::span<const VarId> inputs, double attr, bool trans_a,
                   bool trans_b) {
    const bool binary =
        kind == Op::MatMul || kind == Op::Add || kind == Op::Mul || kind == Op::ConcatRows;
    if (kind == Op::Leaf) throw Error("apply: leaf is not an operation");
    if (inputs.size() != (binary ? 2u : 1u))
        throw Error(std::string("apply: wrong arity for ") + op_name(kind));
    const Node& na = node(inputs[0]);
    const Node* nb = binary ? &node(inputs[1]) : nullptr;

    Node n;
    n.kind = kind;
    n.a = inputs[0].index;
    n.b = binary ? inputs[1].index : -1;
    n.attr = attr;
    n.trans_a = trans_a;
    n.trans_b = trans_b;
    n.requires_grad = na.requires_grad || (nb && nb->requires_grad);
    n.value = eval_op(kind, na.value, nb ? &nb->value : nullptr, attr, trans_a, trans_b);
    if (!n.value.all_finite())
        throw NumericError(std::string(op_name(kind)) + " produced non-finite output, inputs " +
                           na.value.shape_str() + (nb ? " " + nb->value.shape_str() : ""));
    nodes_.push_back(std::move(n));
    return VarId{static_cast<std::int32_t>(nodes_.size() - 1)};
}

VarId Graph::matmul(VarId a, VarId b, bool trans_a, bool trans_b) {
    const VarId in[2] = {a, b};
    return apply(Op::MatMul, in, 0.0, trans_a, trans_b);
}
VarId Graph::add(VarId a, VarId b) {
    const VarId in[2] = {a, b};
    return apply(Op::Add, in);
}
VarId Graph::mul(VarId a, VarId b) {
    const VarId in[2] = {a, b};
    return apply(Op::Mul, in);
}
VarId Graph::relu(VarId a) { return apply(Op::Relu, {&a, 1}); }
VarId Graph::tanh(VarId a) { return apply(Op::Tanh, {&a, 1}); }
VarId Graph::sigmoid(VarId a) { return apply(Op::Sigmoid, {&a, 1}); }
VarId Graph::log(VarId a) { return apply(Op::Log, {&a, 1}); }
VarId Graph::pow(VarId a, double exponent) { return apply(Op::Pow, {&a, 1}, exponent); }
VarId Graph::mean(VarId a) { return apply(Op::Mean, {&a, 1}); }
VarId Graph::sum(VarId a) { return apply(Op::Sum, {&a, 1}); }
VarId Graph::concat_rows(VarId a, VarId b) {
    const VarId in[2] = {a, b};
    return apply(Op::ConcatRows, in);
}

VarId Graph::affine(VarId x, double k, double c) {
    const std::size_t r = value(x).rows(), cl = value(x).cols();
    VarId scaled = mul(x, constant_full(r, cl, k));
    return add(scaled, constant_full(r, cl, c));
}

VarId Graph::scale(VarId x, double k) {
    const std::size_t r = value(x).rows(), cl = value(x).cols();
    return mul(x, constant_full(r, cl, k));
}

const Tensor& Graph::value(VarId id) const { return node(id).value; }
bool Graph::is_leaf(VarId id) const { return node(id).kind == Op::Leaf; }
bool Graph::is_variable(VarId id) const { return node(id).is_variable; }

namespace {

struct RetainedEmitter {
    Graph& g;
    Handle op(Op kind, Handle a, Handle b, double attr = 0.0, bool ta = false, bool tb = false) {
        const VarId ia{static_cast<std::int32_t>(a)};
        if (b == kNone) return g.apply(kind, {&ia, 1}, attr, ta, tb).index;
        const VarId in[2] = {ia, VarId{static_cast<std::int32_t>(b)}};
        return g.apply(kind, in, attr, ta, tb).index;
    }
    Handle cnst(Tensor t) { return g.constant(std::move(t)).index; }
    const Tensor& val(Handle h) const { return g.value(VarId{static_cast<std::int32_t>(h)}); }
};

struct ScratchEmitter {
    const Graph& g;
    std::vector<Tensor> store;

    const Tensor& val(Handle h) const {
        if (h >= 0) return g.value(VarId{static_cast<std::int32_t>(h)});
        return store[static_cast<std::size_t>(~h)];
    }
    Handle put(Tensor t) {
        store.push_back(std::move(t));
        return ~static_cast<Handle>(store.size() - 1);
    }
    Handle op(Op kind, Handle a, Handle b, double attr = 0.0, bool ta = false, bool tb = false) {
        Tensor out = eval_op(kind, val(a), b == kNone ? nullptr : &val(b), attr, ta, tb);
        if (!out.all_finite())
            throw NumericError(std::string(op_name(kind)) +
                               " produced non-finite output during backward");
        return put(std::move(out));
    }
    Handle cnst(Tensor t) { return put(std::move(t)); }
};

}  // namespace

template <class Emitter>
void Graph::backward_impl(VarId root, std::span<const VarId> wrt, Emitter& em,
                          std::vector<std::int64_t>& adjoint_of, bool wrt_any_node) {
    const Node& r = node(root);
    if (!r.value.is_scalar())
        throw ShapeError("backward: root must be scalar-shaped, got " + r.value.shape_str());
    for (VarId w : wrt) {
        const Node& n = node(w);
        if (!wrt_any_node && (n.kind != Op::Leaf || !n.is_variable))
            throw Error("backward: gradients may only be requested wrt variable leaves");
        if (wrt_any_node && !n.requires_grad && !(n.kind == Op::Leaf && n.is_variable))
            throw Error("backward: wrt node does not depend on any variable");
    }

    // Ancestors of root that depend on some variable.
    std::vector<char> active(nodes_.size(), 0);
    std::vector<std::int32_t> stack{root.index};
    while (!stack.empty()) {
        const std::int32_t id = stack.back();
        stack.pop_back();
        if (active[id] || !nodes_[id].requires_grad) continue;
        active[id] = 1;
        if (nodes_[id].a >= 0 && nodes_[nodes_[id].a].requires_grad) stack.push_back(nodes_[id].a);
        if (nodes_[id].b >= 0 && nodes_[nodes_[id].b].requires_grad) stack.push_back(nodes_[id].b);
    }

    adjoint_of.assign(nodes_.size(), kNone);
    if (!active[root.index]) return;  // root does not depend on any variable
    adjoint_of[root.index] = em.cnst(Tensor::scalar(1.0));

    auto accumulate = [&](std::int32_t target, Handle contribution) {
        if (!nodes_[target].requires_grad) return;
        if (adjoint_of[target] == kNone)
            adjoint_of[target] = contribution;
        else
            adjoint_of[target] = em.op(Op::Add, adjoint_of[target], contribution);
    };

    const std::size_t node_limit = nodes_.size();  // retained mode appends past this
    for (std::int32_t id = root.index; id >= 0; --id) {
        if (static_cast<std::size_t>(id) >= node_limit) continue;
        if (!active[id] || adjoint_of[id] == kNone) continue;
        // Scalar metadata only; emission may reallocate nodes_, so references
        // into it must not be held across em.op/em.cnst calls.
        const Op kind = nodes_[id].kind;
        if (kind == Op::Leaf) continue;
        const std::int32_t ia = nodes_[id].a;
        const std::int32_t ib = nodes_[id].b;
        const double attr = nodes_[id].attr;
        const bool ta = nodes_[id].trans_a;
        const bool tb = nodes_[id].trans_b;
        const std::size_t vr = nodes_[id].value.rows();
        const std::size_t vc = nodes_[id].value.cols();
        const bool grad_a = ia >= 0 && nodes_[ia].requires_grad;
        const bool grad_b = ib >= 0 && nodes_[ib].requires_grad;
        const Handle G = adjoint_of[id];
        switch (kind) {
            case Op::MatMul: {
                if (grad_a) {
                    Handle dA = !ta ? em.op(Op::MatMul, G, ib, 0.0, false, !tb)
                                    : em.op(Op::MatMul, ib, G, 0.0, tb, true);
                    accumulate(ia, dA);
                }
                if (grad_b) {
                    Handle dB = !tb ? em.op(Op::MatMul, ia, G, 0.0, !ta, false)
                                    : em.op(Op::MatMul, G, ia, 0.0, true, ta);
                    accumulate(ib, dB);
                }
                break;
            }
            case Op::Add: {
                const bool broadcast = !nodes_[ia].value.same_shape(nodes_[ib].value);
                const std::size_t a_rows = nodes_[ia].value.rows();
                if (grad_a) accumulate(ia, G);
                if (grad_b) {
                    if (!broadcast) {
                        accumulate(ib, G);
                    } else {
                        // Row-broadcast vector: column sums via ones^T * G.
                        Handle ones = em.cnst(Tensor::full(a_rows, 1, 1.0));
                        accumulate(ib, em.op(Op::MatMul, ones, G, 0.0, true, false));
                    }
                }
                break;
            }
            case Op::Mul: {
                if (grad_a) accumulate(ia, em.op(Op::Mul, G, ib));
                if (grad_b) accumulate(ib, em.op(Op::Mul, G, ia));
                break;
            }
            case Op::Relu: {
                Tensor mask = nodes_[ia].value;
                for (double& v : mask.values) v = v > 0.0 ? 1.0 : 0.0;
                accumulate(ia, em.op(Op::Mul, G, em.cnst(std::move(mask))));
                break;
            }
            case Op::Tanh: {
                // d tanh = 1 - t^2, expressed on the output node so second
                // derivatives flow.
                Handle t2 = em.op(Op::Mul, id, id);
                Handle neg = em.op(Op::Mul, t2, em.cnst(Tensor::full(vr, vc, -1.0)));
                Handle one_minus = em.op(Op::Add, em.cnst(Tensor::full(vr, vc, 1.0)), neg);
                accumulate(ia, em.op(Op::Mul, G, one_minus));
                break;
            }
            case Op::Sigmoid: {
                // d sigma = s - s^2.
                Handle s2 = em.op(Op::Mul, id, id);
                Handle neg = em.op(Op::Mul, s2, em.cnst(Tensor::full(vr, vc, -1.0)));
                Handle ds = em.op(Op::Add, id, neg);
                accumulate(ia, em.op(Op::Mul, G, ds));
                break;
            }
            case Op::Log: {
                Handle inv = em.op(Op::Pow, ia, kNone, -1.0);
                accumulate(ia, em.op(Op::Mul, G, inv));
                break;
            }
            case Op::Pow: {
                if (attr == 0.0) break;  // derivative identically zero
                Handle deriv;
                if (attr == 1.0) {
                    deriv = G;
                } else {
                    const std::size_t r = nodes_[ia].value.rows();
                    const std::size_t c = nodes_[ia].value.cols();
                    Handle xp = em.op(Op::Pow, ia, kNone, attr - 1.0);
                    Handle scaled = em.op(Op::Mul, xp, em.cnst(Tensor::full(r, c, attr)));
                    deriv = em.op(Op::Mul, G, scaled);
                }
                accumulate(ia, deriv);
                break;
            }
            case Op::Mean:
            case Op::Sum: {
                const std::size_t r = nodes_[ia].value.rows();
                const std::size_t c = nodes_[ia].value.cols();
                Handle col = em.op(Op::MatMul, em.cnst(Tensor::full(r, 1, 1.0)), G);
                Handle grid = em.op(Op::MatMul, col, em.cnst(Tensor::full(1, c, 1.0)));
                if (kind == Op::Mean) {
                    const double inv_n = 1.0 / static_cast<double>(r * c);
                    grid = em.op(Op::Mul, grid, em.cnst(Tensor::full(r, c, inv_n)));
                }
                accumulate(ia, grid);
                break;
            }
            case Op::ConcatRows: {
                const std::size_t n1 = nodes_[ia].value.rows();
                const std::size_t n2 = nodes_[ib].value.rows();
                if (grad_a) {
                    Tensor s1 = Tensor::zeros(n1, n1 + n2);
                    for (std::size_t i = 0; i < n1; ++i) s1.at(i, i) = 1.0;
                    accumulate(ia, em.op(Op::MatMul, em.cnst(std::move(s1)), G));
                }
                if (grad_b) {
                    Tensor s2 = Tensor::zeros(n2, n1 + n2);
                    for (std::size_t i = 0; i < n2; ++i) s2.at(i, n1 + i) = 1.0;
                    accumulate(ib, em.op(Op::MatMul, em.cnst(std::move(s2)), G));
                }
                break;
            }
            case Op::Leaf:
                break;
        }
    }
}

std::vector<Tensor> Graph::backward(VarId root, std::span<const VarId> wrt, bool wrt_any_node) {
    ScratchEmitter em{*this, {}};
    std::vector<std::int64_t> adjoint_of;
    backward_impl(root, wrt, em, adjoint_of, wrt_any_node);
    std::vector<Tensor> out;
    out.reserve(wrt.size());
    for (VarId w : wrt) {
        const Handle h = adjoint_of.empty() ? kNone : adjoint_of[w.index];
        if (h == kNone) {
            const Tensor& v = node(w).value;
            out.push_back(Tensor::zeros(v.rows(), v.cols()));
        } else {
            out.push_back(em.val(h));
        }
    }
    return out;
}

std::vector<VarId> Graph::backward_retained(VarId root, std::span<const VarId> wrt,
                                            bool wrt_any_node) {
    RetainedEmitter em{*this};
    std::vector<std::int64_t> adjoint_of;
    backward_impl(root, wrt, em, adjoint_of, wrt_any_node);
    std::vector<VarId> out;
    out.reserve(wrt.size());
    for (VarId w : wrt) {
        const Handle h =
            adjoint_of.empty() || static_cast<std::size_t>(w.index) >= adjoint_of.size()
                ? kNone
                : adjoint_of[w.index];
        if (h == kNone) {
            const Tensor& v = node(w).value;
            out.push_back(constant(Tensor::zeros(v.rows(), v.cols())));
        } else {
            out.push_back(VarId{static_cast<std::int32_t>(h)});
        }
    }
    return out;
}

Tensor Graph::grad_of_grad(VarId root, VarId inner_wrt, const Tensor& probe, VarId outer_wrt) {
    if (!node(inner_wrt).value.same_shape(probe))
        throw ShapeError("grad_of_grad: probe shape " + probe.shape_str() +
                         " does not match wrt shape " + node(inner_wrt).value.shape_str());
    const VarId one_wrt[1] = {inner_wrt};
    VarId g = backward_retained(root, one_wrt)[0];
    VarId contracted = sum(mul(g, constant(probe)));
    const VarId outer[1] = {outer_wrt};
    return backward(contracted, outer)[0];
}

}  // namespace metaug
