#include "metaug/mlp.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "metaug/error.hpp"
#include "metaug/rng.hpp"

namespace metaug {

void MlpArchitecture::validate() const {
    if (input_dim == 0) throw ConfigError("architecture: input_dim must be positive");
    if (hidden.empty()) throw ConfigError("architecture: at least one hidden layer required");
    for (std::size_t w : hidden)
        if (w == 0) throw ConfigError("architecture: hidden widths must be positive");
}

std::vector<std::pair<std::size_t, std::size_t>> MlpArchitecture::layer_shapes() const {
    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    std::size_t in = input_dim;
    for (std::size_t w : hidden) {
        shapes.emplace_back(in, w);
        in = w;
    }
    shapes.emplace_back(in, 1);
    return shapes;
}

std::size_t MlpArchitecture::param_count() const {
    std::size_t n = 0;
    for (auto [in, out] : layer_shapes()) n += in * out + out;
    return n;
}

ParamSet init_params(const MlpArchitecture& arch, std::uint64_t seed) {
    arch.validate();
    ParamSet p;
    p.arch = arch;
    p.init_seed = seed;
    Rng rng(seed);
    for (auto [in, out] : arch.layer_shapes()) {
        const double bound = std::sqrt(1.0 / static_cast<double>(in));
        Tensor w(in, out);
        for (double& v : w.values) v = rng.uniform(-bound, bound);
        p.weights.push_back(std::move(w));
        p.biases.push_back(Tensor::zeros(1, out));
    }
    return p;
}

ParamSet zero_params(const MlpArchitecture& arch) {
    arch.validate();
    ParamSet p;
    p.arch = arch;
    for (auto [in, out] : arch.layer_shapes()) {
        p.weights.push_back(Tensor::zeros(in, out));
        p.biases.push_back(Tensor::zeros(1, out));
    }
    return p;
}

VarId mlp_forward_with(Graph& g, const MlpArchitecture& arch, const std::vector<VarId>& weights,
                       const std::vector<VarId>& biases, VarId input) {
    if (g.value(input).cols() != arch.input_dim)
        throw ShapeError("mlp_forward: input has " + std::to_string(g.value(input).cols()) +
                         " columns, architecture expects " + std::to_string(arch.input_dim));
    VarId h = input;
    const std::size_t layers = weights.size();
    for (std::size_t l = 0; l < layers; ++l) {
        h = g.add(g.matmul(h, weights[l]), biases[l]);
        if (l + 1 < layers)
            h = arch.activation == Activation::Relu ? g.relu(h) : g.tanh(h);
    }
    if (arch.head == Head::SigmoidLogit) h = g.sigmoid(h);
    return h;
}

MlpNodes mlp_forward(Graph& g, const ParamSet& params, VarId input, bool params_as_variables) {
    MlpNodes nodes;
    for (std::size_t l = 0; l < params.layer_count(); ++l) {
        nodes.weights.push_back(params_as_variables ? g.variable(params.weights[l])
                                                    : g.constant(params.weights[l]));
        nodes.biases.push_back(params_as_variables ? g.variable(params.biases[l])
                                                   : g.constant(params.biases[l]));
    }
    nodes.output = mlp_forward_with(g, params.arch, nodes.weights, nodes.biases, input);
    return nodes;
}

Tensor predict(const ParamSet& params, const Tensor& X) {
    if (X.cols() != params.arch.input_dim)
        throw ShapeError("predict: input width " + std::to_string(X.cols()) +
                         " != " + std::to_string(params.arch.input_dim));
    Tensor h = X;
    const std::size_t layers = params.layer_count();
    for (std::size_t l = 0; l < layers; ++l) {
        Tensor z = matmul_plain(h, params.weights[l], false, false);
        const Tensor& b = params.biases[l];
        for (std::size_t i = 0; i < z.rows(); ++i)
            for (std::size_t j = 0; j < z.cols(); ++j) z.at(i, j) += b.values[j];
        if (l + 1 < layers) {
            if (params.arch.activation == Activation::Relu) {
                for (double& v : z.values) v = v > 0.0 ? v : 0.0;
            } else {
                for (double& v : z.values) v = std::tanh(v);
            }
        }
        h = std::move(z);
    }
    if (params.arch.head == Head::SigmoidLogit)
        for (double& v : h.values) v = 1.0 / (1.0 + std::exp(-v));
    return h;
}

namespace {

nlohmann::json tensor_to_json(const Tensor& t) {
    return nlohmann::json{{"shape", t.shape}, {"values", t.values}};
}

Tensor tensor_from_json(const nlohmann::json& j) {
    Tensor t;
    t.shape = j.at("shape").get<std::vector<std::size_t>>();
    t.values = j.at("values").get<std::vector<double>>();
    std::size_t n = 1;
    for (std::size_t s : t.shape) n *= s;
    if (t.shape.empty() || n != t.values.size())
        throw ParseError("params json: tensor shape/value mismatch");
    return t;
}

}  // namespace

std::string params_to_json(const ParamSet& p) {
    nlohmann::json j;
    j["arch"] = {{"input_dim", p.arch.input_dim},
                 {"hidden", p.arch.hidden},
                 {"activation", p.arch.activation == Activation::Relu ? "relu" : "tanh"},
                 {"head", p.arch.head == Head::SigmoidLogit ? "sigmoid" : "linear"}};
    j["init_seed"] = p.init_seed;
    j["weights"] = nlohmann::json::array();
    j["biases"] = nlohmann::json::array();
    for (const Tensor& w : p.weights) j["weights"].push_back(tensor_to_json(w));
    for (const Tensor& b : p.biases) j["biases"].push_back(tensor_to_json(b));
    return j.dump(2);
}

ParamSet params_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ParamSet p;
    p.arch.input_dim = j.at("arch").at("input_dim").get<std::size_t>();
    p.arch.hidden = j.at("arch").at("hidden").get<std::vector<std::size_t>>();
    p.arch.activation =
        j.at("arch").at("activation").get<std::string>() == "relu" ? Activation::Relu : Activation::Tanh;
    p.arch.head =
        j.at("arch").at("head").get<std::string>() == "sigmoid" ? Head::SigmoidLogit : Head::Linear;
    p.init_seed = j.value("init_seed", std::uint64_t{0});
    for (const auto& w : j.at("weights")) p.weights.push_back(tensor_from_json(w));
    for (const auto& b : j.at("biases")) p.biases.push_back(tensor_from_json(b));
    if (p.weights.size() != p.biases.size() || p.weights.size() != p.arch.hidden.size() + 1)
        throw ParseError("params json: layer count mismatch");
    return p;
}

void save_params(const ParamSet& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("save_params: cannot open " + path);
    out << params_to_json(p);
}

ParamSet load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_params: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return params_from_json(ss.str());
}

}  // namespace metaug
