#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "psse/measurement.hpp"
#include "psse/nn/estimator.hpp"
#include "psse/nn/fnn.hpp"
#include "psse/nn/gnn.hpp"
#include "psse/shift_operator.hpp"

namespace psse::nn {

enum class PriorKind { gnn, fnn };
enum class InitStrategy { warm, random };

struct UnrolledConfig {
    int iterations = 6;  // I; the network has I + 1 blocks
    PriorKind prior = PriorKind::gnn;
    GnnConfig gnn;
    std::vector<int> fnn_hidden{64};  // prior = fnn only
    bool tied = false;                // one set of prior weights for every block

    int blocks() const noexcept { return iterations + 1; }
    void validate() const;
    nlohmann::json to_json() const;
    static UnrolledConfig from_json(nlohmann::json const& j);
};

/// One unrolled iteration: v_next = A z + B u + b with u = prior(v).
struct UnrolledBlock {
    Tensor gain;        // A: 2N x M
    Tensor prior_gain;  // B: 2N x 2N
    Tensor offset;      // b: 1 x 2N
    std::vector<Tensor> prior;  // GNN taps layer by layer, or MLP weight/bias pairs
};

/// Per-sample intermediates of one forward pass.
struct UnrolledTrace {
    std::vector<StateVector> states;  // v_0 .. v_{I+1}
    std::vector<StateVector> priors;  // u_0 .. u_I
};

class UnrolledModel final : public Estimator {
  public:
    /// All-zero parameters.
    UnrolledModel(UnrolledConfig cfg, ShiftOperator shift, Eigen::Index measurement_dim);

    std::string kind() const override { return "unrolled"; }
    Eigen::Index measurement_dim() const override { return measurements_; }
    Eigen::Index state_dim() const override { return 2 * shift_.size(); }
    std::vector<Tensor*> parameters() override;
    std::vector<Tensor const*> parameters() const override;
    std::vector<std::string> parameter_names() const override;
    ad::Var forward(ad::Tape& tape, ad::Var z, std::span<ad::Var const> params) const override;
    nlohmann::json architecture() const override;
    std::unique_ptr<Estimator> clone() const override { return std::make_unique<UnrolledModel>(*this); }

    UnrolledTrace trace(Eigen::VectorXd const& z) const;

    UnrolledConfig const& config() const noexcept { return cfg_; }
    ShiftOperator const& shift() const noexcept { return shift_; }
    std::vector<UnrolledBlock>& blocks() noexcept { return blocks_; }
    std::vector<UnrolledBlock> const& blocks() const noexcept { return blocks_; }

    /// Prior map u = prior_i(v) for a single state, outside any tape.
    StateVector apply_prior(int block, StateVector const& v) const;

    static UnrolledModel from_architecture(nlohmann::json const& arch);

  private:
    bool owns_prior(int block) const noexcept { return !cfg_.tied || block == 0; }
    ad::Var forward_impl(ad::Tape& tape, ad::Var z, std::span<ad::Var const> params, UnrolledTrace* trace) const;

    UnrolledConfig cfg_;
    ShiftOperator shift_;
    Eigen::Index measurements_;
    std::vector<UnrolledBlock> blocks_;
};

/// warm: every block gets the linearized step at flat start with weight λ,
/// and small random prior weights. random: every tensor random at the same scale.
/// Throws IllPosedError (warm, λ = 0) when the normal matrix is singular.
UnrolledModel init_unrolled(UnrolledConfig const& cfg, ShiftOperator const& shift, MeasurementModel const& mm,
                            double lambda, InitStrategy strategy, std::uint64_t seed);

std::string to_string(PriorKind kind);
std::string to_string(InitStrategy strategy);
PriorKind parse_prior_kind(std::string const& name);
InitStrategy parse_init_strategy(std::string const& name);

}  // namespace psse::nn
