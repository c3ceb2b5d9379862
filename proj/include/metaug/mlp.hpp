#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "metaug/graph.hpp"
#include "metaug/tensor.hpp"

namespace metaug {

enum class Activation { Relu, Tanh };
enum class Head { SigmoidLogit, Linear };

struct MlpArchitecture {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden;
    Activation activation = Activation::Relu;
    Head head = Head::SigmoidLogit;

    void validate() const;
    // (fan_in, fan_out) per layer, hidden layers plus the 1-unit head.
    std::vector<std::pair<std::size_t, std::size_t>> layer_shapes() const;
    std::size_t param_count() const;
    bool operator==(const MlpArchitecture&) const = default;
};

// Flattened MLP parameters: weight matrices fan_in x fan_out, biases 1 x fan_out.
struct ParamSet {
    MlpArchitecture arch;
    std::vector<Tensor> weights;
    std::vector<Tensor> biases;
    std::uint64_t init_seed = 0;

    std::size_t layer_count() const { return weights.size(); }
};

// Weights ~ uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)), biases zero.
// Deterministic given seed.
ParamSet init_params(const MlpArchitecture& arch, std::uint64_t seed);
ParamSet zero_params(const MlpArchitecture& arch);

struct MlpNodes {
    std::vector<VarId> weights;
    std::vector<VarId> biases;
    VarId output;  // probabilities in (0,1) for the sigmoid head, raw values otherwise
};

// Forward pass on the graph over an existing input node (n x input_dim).
// With params_as_variables the parameters become differentiable leaves.
MlpNodes mlp_forward(Graph& g, const ParamSet& params, VarId input, bool params_as_variables);

// Forward pass from parameter nodes already present in the graph (e.g. the
// adapted parameters inside the meta loop).
VarId mlp_forward_with(Graph& g, const MlpArchitecture& arch, const std::vector<VarId>& weights,
                       const std::vector<VarId>& biases, VarId input);

// Graph-free inference; uses the same primitive arithmetic as the graph path.
Tensor predict(const ParamSet& params, const Tensor& X);

// JSON round trip (bit-exact for f64).
std::string params_to_json(const ParamSet& p);
ParamSet params_from_json(const std::string& text);
void save_params(const ParamSet& p, const std::string& path);
ParamSet load_params(const std::string& path);

}  // namespace metaug
