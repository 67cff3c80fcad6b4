#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "psse/dataset.hpp"
#include "psse/nn/estimator.hpp"

namespace psse::nn {

struct TrainOptions {
    int epochs = 500;
    std::size_t batch = 32;
    double lr = 1e-3;
    double huber_delta = 1.0;
    std::uint64_t seed = 1;  // mini-batch order

    void validate() const;
};

/// Entry 0 is the loss before the first update; entry e the loss after epoch e.
/// test_loss stays empty when the dataset has no test samples.
struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> test_loss;
};

/// Replaces a batch of inputs before the training step (robust training).
/// Receives the current model, the measurement rows and the matching states.
using InputTransform =
    std::function<Tensor(Estimator const& model, Tensor const& z, Tensor const& v_star, std::span<std::size_t const> ids)>;

/// Mini-batch Adam on the mean Huber loss over the train split.
/// Throws NumericalError naming the first sample with a non-finite loss.
TrainHistory train(Estimator& model, Dataset const& data, TrainOptions const& opts,
                   InputTransform const& transform = {});

/// Mean Huber loss of the model over the given samples.
double mean_loss(Estimator const& model, Dataset const& data, std::vector<std::size_t> const& which, double delta);

/// Mean Huber loss per row of (pred − target).
Eigen::VectorXd row_huber(Eigen::MatrixXd const& pred, Eigen::MatrixXd const& target, double delta);

}  // namespace psse::nn
