#include "psse/autodiff/adam.hpp"

#include <cmath>

#include "psse/error.hpp"

namespace psse::ad {

AdamState::AdamState(std::span<Tensor* const> params, AdamOptions opts) : options(opts) {
    first.reserve(params.size());
    second.reserve(params.size());
    for (auto const* p : params) {
        first.push_back(Tensor::Zero(p->rows(), p->cols()));
        second.push_back(Tensor::Zero(p->rows(), p->cols()));
    }
}

void adam_step(std::span<Tensor* const> params, std::span<Tensor const> grads, AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.first.size())
        throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                         std::to_string(grads.size()) + " gradients, " + std::to_string(state.first.size()) +
                         " moment slots");
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (grads[k].rows() != params[k]->rows() || grads[k].cols() != params[k]->cols() ||
            state.first[k].rows() != params[k]->rows() || state.first[k].cols() != params[k]->cols())
            throw ShapeError("adam_step: gradient/moment shape mismatch for parameter " + std::to_string(k));
        if (!grads[k].allFinite())
            throw NumericalError("adam_step: non-finite gradient for parameter " + std::to_string(k));
    }

    ++state.step;
    auto const& o = state.options;
    double const c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
    double const c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto m = state.first[k].array();
        auto v = state.second[k].array();
        auto g = grads[k].array();
        m = o.beta1 * m + (1.0 - o.beta1) * g;
        v = o.beta2 * v + (1.0 - o.beta2) * g.square();
        params[k]->array() -= o.lr * (m / c1) / ((v / c2).sqrt() + o.eps);
    }
}

}  // namespace psse::ad
