#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "psse/autodiff/tape.hpp"

namespace psse::ad {

struct AdamOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First/second moment estimates for a fixed list of parameter tensors.
struct AdamState {
    AdamOptions options;
    std::vector<Tensor> first;
    std::vector<Tensor> second;
    std::int64_t step = 0;

    AdamState() = default;
    AdamState(std::span<Tensor* const> params, AdamOptions opts);
};

/// One bias-corrected Adam update. Throws NumericalError (and leaves every
/// parameter untouched) if any gradient entry is non-finite.
void adam_step(std::span<Tensor* const> params, std::span<Tensor const> grads, AdamState& state);

}  // namespace psse::ad
