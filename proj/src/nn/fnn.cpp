#include "psse/nn/fnn.hpp"

#include <cmath>

#include "psse/error.hpp"

namespace psse::nn {

MlpParams zero_mlp(std::vector<int> const& widths) {
    if (widths.size() < 2) throw ConfigError("dense network needs at least input and output widths");
    for (int w : widths)
        if (w < 1) throw ConfigError("dense network widths must be positive");
    MlpParams p;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        p.weights.push_back(Tensor::Zero(widths[l + 1], widths[l]));
        p.biases.push_back(Tensor::Zero(1, widths[l + 1]));
    }
    return p;
}

MlpParams random_mlp(std::vector<int> const& widths, std::mt19937_64& rng) {
    MlpParams p = zero_mlp(widths);
    for (auto& w : p.weights) {
        std::uniform_real_distribution<double> dist(-1.0 / std::sqrt(static_cast<double>(w.cols())),
                                                    1.0 / std::sqrt(static_cast<double>(w.cols())));
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
    }
    return p;
}

std::vector<Tensor> flatten(MlpParams const& p) {
    std::vector<Tensor> out;
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        out.push_back(p.weights[l]);
        out.push_back(p.biases[l]);
    }
    return out;
}

ad::Var mlp_forward(ad::Var x, std::span<ad::Var const> params) {
    if (params.empty() || params.size() % 2 != 0)
        throw ShapeError("mlp_forward: expected weight/bias pairs, got " + std::to_string(params.size()) + " tensors");
    std::size_t const layers = params.size() / 2;
    for (std::size_t l = 0; l < layers; ++l) {
        x = ad::add_bias(ad::linear(x, params[2 * l]), params[2 * l + 1]);
        if (l + 1 < layers) x = ad::relu(x);
    }
    return x;
}

FnnModel::FnnModel(Eigen::Index measurement_dim, Eigen::Index state_dim, std::vector<int> hidden, std::uint64_t seed) {
    if (measurement_dim < 1 || state_dim < 1) throw ShapeError("fnn: dimensions must be positive");
    widths_.push_back(static_cast<int>(measurement_dim));
    widths_.insert(widths_.end(), hidden.begin(), hidden.end());
    widths_.push_back(static_cast<int>(state_dim));
    std::mt19937_64 rng(seed);
    mlp_ = random_mlp(widths_, rng);
}

std::vector<Tensor*> FnnModel::parameters() {
    std::vector<Tensor*> out;
    for (std::size_t l = 0; l < mlp_.weights.size(); ++l) {
        out.push_back(&mlp_.weights[l]);
        out.push_back(&mlp_.biases[l]);
    }
    return out;
}

std::vector<Tensor const*> FnnModel::parameters() const {
    std::vector<Tensor const*> out;
    for (std::size_t l = 0; l < mlp_.weights.size(); ++l) {
        out.push_back(&mlp_.weights[l]);
        out.push_back(&mlp_.biases[l]);
    }
    return out;
}

std::vector<std::string> FnnModel::parameter_names() const {
    std::vector<std::string> out;
    for (std::size_t l = 0; l < mlp_.weights.size(); ++l) {
        out.push_back("layer" + std::to_string(l) + ".weight");
        out.push_back("layer" + std::to_string(l) + ".bias");
    }
    return out;
}

ad::Var FnnModel::forward(ad::Tape&, ad::Var z, std::span<ad::Var const> params) const {
    if (z.cols() != measurement_dim())
        throw ShapeError("fnn: input has " + std::to_string(z.cols()) + " columns, expected " +
                         std::to_string(measurement_dim()));
    return mlp_forward(z, params);
}

nlohmann::json FnnModel::architecture() const {
    std::vector<int> hidden(widths_.begin() + 1, widths_.end() - 1);
    return {{"kind", "fnn"}, {"measurement_dim", widths_.front()}, {"state_dim", widths_.back()}, {"hidden", hidden}};
}

FnnModel FnnModel::from_architecture(nlohmann::json const& arch) {
    try {
        return FnnModel(arch.at("measurement_dim").get<Eigen::Index>(), arch.at("state_dim").get<Eigen::Index>(),
                        arch.at("hidden").get<std::vector<int>>(), 0);
    } catch (nlohmann::json::exception const& e) {
        throw FormatError(std::string("fnn architecture: ") + e.what());
    }
}

}  // namespace psse::nn
