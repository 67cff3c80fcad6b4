#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "psse/autodiff/tape.hpp"

namespace gradcheck {

using psse::ad::Tape;
using psse::ad::Tensor;
using psse::ad::Var;

using Loss = std::function<Var(Tape&, std::vector<Var> const&)>;

/// ‖analytic − central difference‖ / max(‖analytic‖, ‖central difference‖) over all inputs.
inline double relative_error(Loss const& loss, std::vector<Tensor> inputs, double step = 1e-5) {
    Tape tape;
    std::vector<Var> leaves;
    for (auto const& x : inputs) leaves.push_back(tape.leaf(x));
    tape.backward(loss(tape, leaves));

    auto eval = [&](std::vector<Tensor> const& xs) {
        Tape t;
        std::vector<Var> vs;
        for (auto const& x : xs) vs.push_back(t.constant(x));
        return loss(t, vs).value()(0, 0);
    };

    double diff = 0.0, na = 0.0, nf = 0.0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        Tensor const analytic = leaves[k].grad();
        for (Eigen::Index i = 0; i < inputs[k].size(); ++i) {
            double const x0 = inputs[k].data()[i];
            inputs[k].data()[i] = x0 + step;
            double const fp = eval(inputs);
            inputs[k].data()[i] = x0 - step;
            double const fm = eval(inputs);
            inputs[k].data()[i] = x0;
            double const fd = (fp - fm) / (2.0 * step);
            double const a = analytic.data()[i];
            diff += (a - fd) * (a - fd);
            na += a * a;
            nf += fd * fd;
        }
    }
    double const scale = std::max({std::sqrt(na), std::sqrt(nf), 1e-300});
    return std::sqrt(diff) / scale;
}

inline Tensor random_tensor(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Tensor t(rows, cols);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = n(rng);
    return t;
}

}  // namespace gradcheck
