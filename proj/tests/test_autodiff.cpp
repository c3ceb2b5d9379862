#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "metaug/error.hpp"
#include "metaug/finite_diff.hpp"
#include "metaug/graph.hpp"
#include "metaug/losses.hpp"
#include "metaug/mlp.hpp"
#include "test_support.hpp"

using namespace metaug;
using metaug::testing::GraphRecipe;
using metaug::testing::random_graph;

TEST_CASE("matmul identity and shape errors") {
    Graph g;
    Tensor a(3, 4);
    for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] = 0.5 * static_cast<double>(i) - 2.0;
    VarId av = g.constant(a);
    VarId eye = g.constant(Tensor::identity(3));
    VarId out = g.matmul(eye, av);
    CHECK(max_abs_diff(g.value(out), a) == 0.0);

    VarId bad = g.constant(Tensor::zeros(2, 5));
    CHECK_THROWS_AS(g.matmul(av, bad), ShapeError);
}

TEST_CASE("elementwise primitives match definitions") {
    Graph g;
    VarId x = g.constant(Tensor::from_rows({{-1.0, 0.0, 2.0}}));
    const Tensor& r = g.value(g.relu(x));
    CHECK(r.values == std::vector<double>{0.0, 0.0, 2.0});

    VarId zero = g.constant(Tensor::scalar(0.0));
    CHECK(g.value(g.tanh(zero)).item() == 0.0);
    CHECK(g.value(g.sigmoid(zero)).item() == 0.5);
}

TEST_CASE("non-finite outputs raise numeric errors") {
    Graph g;
    VarId neg = g.constant(Tensor::scalar(-1.0));
    CHECK_THROWS_AS(g.log(neg), NumericError);
    VarId zero = g.constant(Tensor::scalar(0.0));
    CHECK_THROWS_AS(g.pow(zero, -1.0), NumericError);
    VarId big = g.constant(Tensor::scalar(1e308));
    CHECK_THROWS_AS(g.mul(big, big), NumericError);
}

TEST_CASE("backward on simple closed forms") {
    SUBCASE("d(x^2)/dx = 2x") {
        Graph g;
        VarId x = g.variable(Tensor::scalar(3.0));
        VarId y = g.mul(x, x);
        const VarId wrt[1] = {x};
        auto grads = g.backward(y, wrt);
        CHECK(grads[0].item() == doctest::Approx(6.0).epsilon(1e-14));
    }
    SUBCASE("d sum(W x)/dW has x broadcast structure") {
        Graph g;
        VarId w = g.variable(Tensor::from_rows({{1.0, 2.0}, {3.0, 4.0}}));
        VarId x = g.constant(Tensor::from_rows({{5.0}, {7.0}}));
        VarId y = g.sum(g.matmul(w, x));
        const VarId wrt[1] = {w};
        auto grads = g.backward(y, wrt);
        CHECK(max_abs_diff(grads[0], Tensor::from_rows({{5.0, 7.0}, {5.0, 7.0}})) == 0.0);
    }
    SUBCASE("sigmoid'(0) = 1/4") {
        Graph g;
        VarId x = g.variable(Tensor::scalar(0.0));
        VarId y = g.sigmoid(x);
        const VarId wrt[1] = {x};
        auto grads = g.backward(y, wrt);
        CHECK(grads[0].item() == doctest::Approx(0.25).epsilon(1e-14));
    }
}

TEST_CASE("backward validates root shape and wrt kind") {
    Graph g;
    VarId x = g.variable(Tensor::from_rows({{1.0, 2.0}}));
    VarId y = g.relu(x);
    const VarId wrt[1] = {x};
    CHECK_THROWS_AS(g.backward(y, wrt), ShapeError);

    VarId c = g.constant(Tensor::scalar(1.0));
    VarId root = g.sum(x);
    const VarId cw[1] = {c};
    CHECK_THROWS_AS(g.backward(root, cw), Error);
    const VarId dw[1] = {root};
    CHECK_THROWS_AS(g.backward(root, dw), Error);
}

TEST_CASE("gradient wrt an unreachable leaf is exactly zero") {
    Graph g;
    VarId x = g.variable(Tensor::scalar(2.0));
    VarId z = g.variable(Tensor::from_rows({{1.0, 1.0}}));
    VarId y = g.mul(x, x);
    const VarId wrt[2] = {x, z};
    auto grads = g.backward(y, wrt);
    CHECK(grads[1].rows() == 1);
    CHECK(grads[1].cols() == 2);
    CHECK(max_abs(grads[1]) == 0.0);

    auto retained = g.backward_retained(y, wrt);
    CHECK(max_abs(g.value(retained[1])) == 0.0);
}

TEST_CASE("finite_diff_grad basics") {
    Tensor x = Tensor::from_rows({{1.0, 2.0}});
    auto sum_f = [](const Tensor& t) {
        double s = 0;
        for (double v : t.values) s += v;
        return s;
    };
    Tensor g1 = finite_diff_grad(sum_f, x);
    CHECK(max_abs_diff(g1, Tensor::full(1, 2, 1.0)) < 1e-8);

    auto norm2 = [](const Tensor& t) {
        double s = 0;
        for (double v : t.values) s += v * v;
        return s;
    };
    Tensor g2 = finite_diff_grad(norm2, x);
    CHECK(max_abs_diff(g2, Tensor::from_rows({{2.0, 4.0}})) < 1e-8);
}

namespace {

// Backward gradients of a recipe's scalar root wrt every variable leaf.
std::vector<Tensor> recipe_backward(const GraphRecipe& recipe, bool retained) {
    Graph g;
    std::vector<VarId> vars;
    VarId root = recipe.replay(g, recipe.variable_values(), &vars);
    if (!retained) return g.backward(root, vars);
    std::vector<Tensor> out;
    for (VarId id : g.backward_retained(root, vars)) out.push_back(g.value(id));
    return out;
}

double recipe_eval(const GraphRecipe& recipe, const std::vector<Tensor>& vars) {
    Graph g;
    return g.value(recipe.replay(g, vars, nullptr)).item();
}

}  // namespace

TEST_CASE("random composite graphs: backward matches finite differences") {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        GraphRecipe recipe = random_graph(seed, 6);
        auto grads = recipe_backward(recipe, false);
        auto base_vars = recipe.variable_values();
        for (std::size_t v = 0; v < base_vars.size(); ++v) {
            auto f = [&](const Tensor& t) {
                auto vars = base_vars;
                vars[v] = t;
                return recipe_eval(recipe, vars);
            };
            Tensor fd = finite_diff_grad(f, base_vars[v], 1e-5);
            CHECK(rel_error(grads[v], fd) < 1e-4);
            ++checked;
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("retained and scratch backward produce identical gradients") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        GraphRecipe recipe = random_graph(seed, 6);
        auto scratch = recipe_backward(recipe, false);
        auto retained = recipe_backward(recipe, true);
        REQUIRE(scratch.size() == retained.size());
        for (std::size_t v = 0; v < scratch.size(); ++v)
            CHECK(max_abs_diff(scratch[v], retained[v]) == 0.0);
    }
}

TEST_CASE("grad_of_grad closed forms") {
    SUBCASE("x^2: Hessian-vector product is 2v") {
        Graph g;
        VarId x = g.variable(Tensor::scalar(3.0));
        VarId y = g.mul(x, x);
        Tensor probe = Tensor::scalar(1.7);
        Tensor hv = g.grad_of_grad(y, x, probe, x);
        CHECK(hv.item() == doctest::Approx(3.4).epsilon(1e-13));
    }
    SUBCASE("mixed partial of x*y is 1") {
        Graph g;
        VarId x = g.variable(Tensor::scalar(2.0));
        VarId y = g.variable(Tensor::scalar(5.0));
        VarId f = g.mul(x, y);
        Tensor hv = g.grad_of_grad(f, x, Tensor::scalar(1.0), y);
        CHECK(hv.item() == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("probe shape mismatch throws") {
        Graph g;
        VarId x = g.variable(Tensor::from_rows({{1.0, 2.0}}));
        VarId y = g.sum(g.mul(x, x));
        CHECK_THROWS_AS(g.grad_of_grad(y, x, Tensor::scalar(1.0), x), ShapeError);
    }
}

namespace {

// Loss of a tiny MLP as a function of its first-layer weights, for
// second-order checks.
struct TinyMlpCase {
    ParamSet params;
    Tensor X;
    Tensor y;

    explicit TinyMlpCase(std::uint64_t seed) {
        MlpArchitecture arch;
        arch.input_dim = 3;
        arch.hidden = {4, 3};
        arch.activation = Activation::Tanh;  // smooth, so finite differences behave
        arch.head = Head::SigmoidLogit;
        params = init_params(arch, seed);
        Rng rng(seed ^ 0xabcdef);
        X = Tensor(5, 3);
        for (double& v : X.values) v = rng.uniform(-1.0, 1.0);
        y = Tensor(5, 1);
        for (double& v : y.values) v = rng.uniform_int(2) ? 1.0 : 0.0;
    }

    // Builds loss graph with layer-0 weights replaced by `w0`.
    VarId build(Graph& g, const Tensor& w0, VarId* w0_id) const {
        ParamSet p = params;
        p.weights[0] = w0;
        MlpNodes net = mlp_forward(g, p, g.constant(X), true);
        if (w0_id) *w0_id = net.weights[0];
        return loss_bce(g, net.output, g.constant(y));
    }

    Tensor grad_w0(const Tensor& w0) const {
        Graph g;
        VarId w0_id;
        VarId loss = build(g, w0, &w0_id);
        const VarId wrt[1] = {w0_id};
        return g.backward(loss, wrt)[0];
    }
};

}  // namespace

TEST_CASE("mlp loss: backward matches finite differences both directions") {
    TinyMlpCase cs(7);
    Tensor w0 = cs.params.weights[0];
    Tensor analytic = cs.grad_w0(w0);
    auto f = [&](const Tensor& w) {
        Graph g;
        return g.value(cs.build(g, w, nullptr)).item();
    };
    Tensor fd = finite_diff_grad(f, w0, 1e-5);
    CHECK(rel_error(analytic, fd) < 1e-4);
    CHECK(rel_error(fd, analytic) < 1e-4);
}

TEST_CASE("grad_of_grad on random MLPs matches finite differences of backward") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        TinyMlpCase cs(seed);
        Tensor w0 = cs.params.weights[0];
        Rng rng(seed ^ 0x5eed);
        Tensor probe(w0.rows(), w0.cols());
        for (double& v : probe.values) v = rng.uniform(-1.0, 1.0);

        Graph g;
        VarId w0_id;
        VarId loss = cs.build(g, w0, &w0_id);
        Tensor hvp = g.grad_of_grad(loss, w0_id, probe, w0_id);

        // Oracle: central difference of <grad, probe> along each coordinate.
        auto inner = [&](const Tensor& w) {
            Tensor grad = cs.grad_w0(w);
            double s = 0;
            for (std::size_t i = 0; i < grad.values.size(); ++i)
                s += grad.values[i] * probe.values[i];
            return s;
        };
        Tensor fd = finite_diff_grad(inner, w0, 1e-5);
        CHECK(rel_error(hvp, fd) < 1e-3);
    }
}
