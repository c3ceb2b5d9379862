#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "metaug/graph.hpp"
#include "metaug/rng.hpp"
#include "metaug/tensor.hpp"

namespace metaug::testing {

inline std::string data_dir() {
#ifdef METAUG_DATA_DIR
    return METAUG_DATA_DIR;
#else
    return "data";
#endif
}

// A replayable random computation: leaf tensors plus an op recipe. Lets the
// finite-difference oracle re-evaluate the same function at perturbed leaves.
struct GraphRecipe {
    struct Step {
        Op kind;
        int a = -1;
        int b = -1;
        double attr = 0.0;
        bool trans_a = false;
        bool trans_b = false;
        bool is_leaf = false;
        bool is_variable = false;
        Tensor leaf_value;
    };
    std::vector<Step> steps;
    std::vector<int> variable_steps;  // indices of variable leaves
    int root = -1;

    // Builds the graph with the stored leaves, except variables overridden by
    // `vars` (parallel to variable_steps).
    VarId replay(Graph& g, const std::vector<Tensor>& vars, std::vector<VarId>* var_ids) const {
        std::vector<VarId> ids(steps.size());
        std::size_t vi = 0;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const Step& s = steps[i];
            if (s.is_leaf) {
                if (s.is_variable) {
                    ids[i] = g.variable(vars[vi]);
                    if (var_ids) var_ids->push_back(ids[i]);
                    ++vi;
                } else {
                    ids[i] = g.constant(s.leaf_value);
                }
            } else if (s.b >= 0) {
                const VarId in[2] = {ids[s.a], ids[s.b]};
                ids[i] = g.apply(s.kind, in, s.attr, s.trans_a, s.trans_b);
            } else {
                ids[i] = g.apply(s.kind, {&ids[s.a], 1}, s.attr, s.trans_a, s.trans_b);
            }
        }
        return ids[root];
    }

    std::vector<Tensor> variable_values() const {
        std::vector<Tensor> out;
        for (int i : variable_steps) out.push_back(steps[i].leaf_value);
        return out;
    }
};

// Random composite graph over the closed op set, up to `depth` derived ops,
// ending in a scalar reduction. Domains are kept finite-difference safe: log
// and pow only see sigmoid outputs, relu inputs are re-rolled away from the
// kink.
inline GraphRecipe random_graph(std::uint64_t seed, int depth) {
    Rng rng(seed);
    GraphRecipe r;
    Graph probe;  // tracks shapes/values while generating
    std::vector<VarId> ids;

    auto add_step = [&](GraphRecipe::Step s, VarId id) {
        r.steps.push_back(std::move(s));
        ids.push_back(id);
        return static_cast<int>(r.steps.size() - 1);
    };

    const std::size_t n_vars = 1 + rng.uniform_int(2);
    for (std::size_t v = 0; v < n_vars; ++v) {
        const std::size_t rows = 1 + rng.uniform_int(3);
        const std::size_t cols = 1 + rng.uniform_int(3);
        Tensor t(rows, cols);
        for (double& x : t.values) x = rng.uniform(-1.5, 1.5);
        GraphRecipe::Step s;
        s.kind = Op::Leaf;
        s.is_leaf = true;
        s.is_variable = true;
        s.leaf_value = t;
        VarId id = probe.variable(t);
        r.variable_steps.push_back(add_step(std::move(s), id));
    }

    auto emit = [&](Op kind, int a, int b, double attr, bool ta, bool tb) -> int {
        GraphRecipe::Step s;
        s.kind = kind;
        s.a = a;
        s.b = b;
        s.attr = attr;
        s.trans_a = ta;
        s.trans_b = tb;
        VarId id;
        if (b >= 0) {
            const VarId in[2] = {ids[a], ids[b]};
            id = probe.apply(kind, in, attr, ta, tb);
        } else {
            id = probe.apply(kind, {&ids[a], 1}, attr, ta, tb);
        }
        return add_step(std::move(s), id);
    };

    auto emit_const = [&](Tensor t) -> int {
        GraphRecipe::Step s;
        s.kind = Op::Leaf;
        s.is_leaf = true;
        s.leaf_value = t;
        VarId id = probe.constant(std::move(t));
        return add_step(std::move(s), id);
    };

    int last = r.variable_steps.back();
    for (int d = 0; d < depth; ++d) {
        const int pick = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(r.steps.size())));
        const Tensor& pv = probe.value(ids[pick]);
        switch (rng.uniform_int(8)) {
            case 0:
                last = emit(Op::Tanh, pick, -1, 0, false, false);
                break;
            case 1:
                last = emit(Op::Sigmoid, pick, -1, 0, false, false);
                break;
            case 2: {
                // relu away from the kink: shift by a constant if needed
                double min_abs = 1e9;
                for (double v : pv.values) min_abs = std::min(min_abs, std::fabs(v));
                int arg = pick;
                if (min_abs < 1e-3) {
                    int shift = emit_const(Tensor::full(pv.rows(), pv.cols(), 0.37));
                    arg = emit(Op::Add, pick, shift, 0, false, false);
                }
                last = emit(Op::Relu, arg, -1, 0, false, false);
                break;
            }
            case 3: {
                int sg = emit(Op::Sigmoid, pick, -1, 0, false, false);
                last = emit(Op::Log, sg, -1, 0, false, false);
                break;
            }
            case 4: {
                int sg = emit(Op::Sigmoid, pick, -1, 0, false, false);
                const double exps[4] = {2.0, 3.0, 0.5, 1.0};
                last = emit(Op::Pow, sg, -1, exps[rng.uniform_int(4)], false, false);
                break;
            }
            case 5: {
                // elementwise mul/add with a same-shape earlier node if one
                // exists, else with a fresh constant
                int mate = -1;
                for (std::size_t i = 0; i < ids.size(); ++i) {
                    const std::size_t j = (i + rng.uniform_int(ids.size())) % ids.size();
                    if (probe.value(ids[j]).same_shape(pv) && static_cast<int>(j) != pick) {
                        mate = static_cast<int>(j);
                        break;
                    }
                }
                if (mate < 0) {
                    Tensor c(pv.rows(), pv.cols());
                    for (double& x : c.values) x = rng.uniform(-1.0, 1.0);
                    mate = emit_const(std::move(c));
                }
                last = emit(rng.uniform_int(2) ? Op::Mul : Op::Add, pick, mate, 0, false, false);
                break;
            }
            case 6: {
                // matmul with a fresh constant, random transposes
                const bool ta = rng.uniform_int(2) != 0;
                const bool tb = rng.uniform_int(2) != 0;
                const std::size_t inner = ta ? pv.rows() : pv.cols();
                const std::size_t out = 1 + rng.uniform_int(3);
                Tensor c(tb ? out : inner, tb ? inner : out);
                for (double& x : c.values) x = rng.uniform(-0.8, 0.8);
                int mate = emit_const(std::move(c));
                last = emit(Op::MatMul, pick, mate, 0, ta, tb);
                break;
            }
            case 7: {
                // concat with an earlier node of equal column count, else self
                int mate = pick;
                for (std::size_t i = 0; i < ids.size(); ++i) {
                    const std::size_t j = (i + rng.uniform_int(ids.size())) % ids.size();
                    if (probe.value(ids[j]).cols() == pv.cols()) {
                        mate = static_cast<int>(j);
                        break;
                    }
                }
                last = emit(Op::ConcatRows, pick, mate, 0, false, false);
                break;
            }
        }
    }
    r.root = emit(rng.uniform_int(2) ? Op::Mean : Op::Sum, last, -1, 0, false, false);
    return r;
}

}  // namespace metaug::testing
