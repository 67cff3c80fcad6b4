#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "psse/autodiff/tape.hpp"
#include "psse/state.hpp"

namespace psse::nn {

using ad::Tensor;

/// A trainable map from measurement rows (B x M) to state rows (B x 2N).
class Estimator {
  public:
    virtual ~Estimator() = default;

    virtual std::string kind() const = 0;
    virtual Eigen::Index measurement_dim() const = 0;
    virtual Eigen::Index state_dim() const = 0;

    /// Trainable tensors in a fixed order shared by forward(), Adam and checkpoints.
    virtual std::vector<Tensor*> parameters() = 0;
    virtual std::vector<Tensor const*> parameters() const = 0;
    virtual std::vector<std::string> parameter_names() const = 0;

    /// `params` are the tape handles of parameters(), in order.
    virtual ad::Var forward(ad::Tape& tape, ad::Var z, std::span<ad::Var const> params) const = 0;

    /// Everything except the parameter values needed to rebuild the model.
    virtual nlohmann::json architecture() const = 0;
    virtual std::unique_ptr<Estimator> clone() const = 0;

    /// Record parameters on a tape, as gradient leaves or as constants.
    std::vector<ad::Var> bind(ad::Tape& tape, bool trainable) const;

    Eigen::MatrixXd predict(Eigen::MatrixXd const& z_rows) const;
    StateVector predict(Eigen::VectorXd const& z) const;

    std::size_t parameter_count() const;
};

}  // namespace psse::nn
