#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "psse/autodiff/tape.hpp"
#include "psse/shift_operator.hpp"

namespace psse::nn {

using ad::Tensor;

enum class Activation { relu, linear };

/// Layer l maps F_{l-1} features to F_l features with K_l hops.
/// Input and output carry (real, imag) voltage parts, so F_0 = F_L = 2.
struct GnnConfig {
    std::vector<int> widths{2, 8, 2};
    std::vector<int> hops{2, 2};
    std::vector<Activation> activations{Activation::relu, Activation::linear};

    int layers() const noexcept { return static_cast<int>(hops.size()); }
    /// Σ_l K_l · F_l · F_{l-1}
    std::size_t parameter_count() const;
    void validate() const;

    /// `layers` graph convolutions of `hops` taps and `hidden` features;
    /// relu on every layer except the last, which is linear.
    static GnnConfig uniform(int layers, int hops, int hidden);

    nlohmann::json to_json() const;
    static GnnConfig from_json(nlohmann::json const& j);
};

/// filters[l][k] is the F_l x F_{l+1} tap for hop k of layer l (0-based).
using GnnParams = std::vector<std::vector<Tensor>>;

GnnParams zero_gnn_params(GnnConfig const& cfg);
/// Taps uniform in ±1/√(F_{l-1} K_l).
GnnParams random_gnn_params(GnnConfig const& cfg, std::mt19937_64& rng);
std::vector<Tensor> flatten(GnnParams const& params);

/// Σ_k W^k X H_k, with W^k X built by repeated shifts.
Tensor graph_conv(Tensor const& x, ShiftOperator const& w, std::span<Tensor const> filters);
/// X_L of the layered graph network.
Tensor gnn_forward(Tensor const& x0, ShiftOperator const& w, GnnParams const& params, GnnConfig const& cfg);

/// Tape versions. `x` may stack several graphs as consecutive N-row blocks.
ad::Var graph_conv(ad::Var x, ad::SparseRowMajor const& w, std::span<ad::Var const> filters);
/// `filters` lists the taps layer by layer, hop by hop.
ad::Var gnn_forward(ad::Var x0, ad::SparseRowMajor const& w, std::span<ad::Var const> filters, GnnConfig const& cfg);

}  // namespace psse::nn
