#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "psse/nn/estimator.hpp"

namespace psse::nn {

/// Dense layers (weight out x in, bias 1 x out); relu between layers, last layer linear.
struct MlpParams {
    std::vector<Tensor> weights;
    std::vector<Tensor> biases;
};

/// `widths` = input, hidden..., output. Weights uniform in ±1/√fan_in, biases zero.
MlpParams random_mlp(std::vector<int> const& widths, std::mt19937_64& rng);
MlpParams zero_mlp(std::vector<int> const& widths);
/// Weight, bias, weight, bias, ...
std::vector<Tensor> flatten(MlpParams const& params);

/// `params` alternates weight, bias for each layer.
ad::Var mlp_forward(ad::Var x, std::span<ad::Var const> params);

/// Feed-forward baseline mapping z directly to v.
class FnnModel final : public Estimator {
  public:
    /// hidden.size() + 1 weight layers.
    FnnModel(Eigen::Index measurement_dim, Eigen::Index state_dim, std::vector<int> hidden, std::uint64_t seed);

    std::string kind() const override { return "fnn"; }
    Eigen::Index measurement_dim() const override { return widths_.front(); }
    Eigen::Index state_dim() const override { return widths_.back(); }
    std::vector<Tensor*> parameters() override;
    std::vector<Tensor const*> parameters() const override;
    std::vector<std::string> parameter_names() const override;
    ad::Var forward(ad::Tape& tape, ad::Var z, std::span<ad::Var const> params) const override;
    nlohmann::json architecture() const override;
    std::unique_ptr<Estimator> clone() const override { return std::make_unique<FnnModel>(*this); }

    int layers() const noexcept { return static_cast<int>(mlp_.weights.size()); }
    static FnnModel from_architecture(nlohmann::json const& arch);

  private:
    std::vector<int> widths_;
    MlpParams mlp_;
};

}  // namespace psse::nn
