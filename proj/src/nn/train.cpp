#include "psse/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "psse/autodiff/adam.hpp"
#include "psse/error.hpp"

namespace psse::nn {

void TrainOptions::validate() const {
    if (epochs < 0) throw ConfigError("train: epochs must be non-negative");
    if (batch < 1) throw ConfigError("train: batch size must be at least 1");
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("train: learning rate must be positive");
    if (!(huber_delta > 0.0) || !std::isfinite(huber_delta)) throw ConfigError("train: huber delta must be positive");
}

Eigen::VectorXd row_huber(Eigen::MatrixXd const& pred, Eigen::MatrixXd const& target, double delta) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw ShapeError("row_huber: prediction and target shapes differ");
    Eigen::ArrayXXd const r = (pred - target).array().abs();
    Eigen::ArrayXXd const h = (r <= delta).select(0.5 * r.square(), delta * (r - 0.5 * delta));
    return h.rowwise().mean().matrix();
}

double mean_loss(Estimator const& model, Dataset const& data, std::vector<std::size_t> const& which, double delta) {
    if (which.empty()) throw UsageError("mean_loss: no samples");
    auto pred = model.predict(data.measurement_rows(which));
    return row_huber(pred, data.state_rows(which), delta).mean();
}

namespace {

[[noreturn]] void report_non_finite(Eigen::MatrixXd const& pred, Eigen::MatrixXd const& target, double delta,
                                    std::span<std::size_t const> ids) {
    auto const per_row = row_huber(pred, target, delta);
    for (Eigen::Index r = 0; r < per_row.size(); ++r)
        if (!std::isfinite(per_row[r]))
            throw NumericalError("training loss is not finite at sample " + std::to_string(ids[r]));
    // Every row is finite but their sum overflowed; blame the largest.
    Eigen::Index worst = 0;
    if (per_row.size() > 0) per_row.maxCoeff(&worst);
    throw NumericalError("training loss is not finite (overflow), largest at sample " +
                         std::to_string(ids.empty() ? 0 : ids[static_cast<std::size_t>(worst)]));
}

}  // namespace

TrainHistory train(Estimator& model, Dataset const& data, TrainOptions const& opts, InputTransform const& transform) {
    opts.validate();
    data.validate();
    if (data.measurement_dim != model.measurement_dim() || data.state_dim != model.state_dim())
        throw ShapeError("train: dataset is " + std::to_string(data.measurement_dim) + " -> " +
                         std::to_string(data.state_dim) + ", model is " + std::to_string(model.measurement_dim()) +
                         " -> " + std::to_string(model.state_dim()));
    auto const train_ids = data.indices(Split::train);
    auto const test_ids = data.indices(Split::test);
    if (train_ids.empty()) throw UsageError("train: the dataset has no training samples");

    TrainHistory history;
    auto record = [&] {
        double const l = mean_loss(model, data, train_ids, opts.huber_delta);
        if (!std::isfinite(l)) {
            auto pred = model.predict(data.measurement_rows(train_ids));
            report_non_finite(pred, data.state_rows(train_ids), opts.huber_delta, train_ids);
        }
        history.train_loss.push_back(l);
        if (!test_ids.empty()) history.test_loss.push_back(mean_loss(model, data, test_ids, opts.huber_delta));
    };
    record();

    auto params = model.parameters();
    ad::AdamState adam(params, ad::AdamOptions{.lr = opts.lr});
    std::mt19937_64 rng(opts.seed);
    std::vector<std::size_t> order = train_ids;
    std::vector<Tensor> grads(params.size());

    for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += opts.batch) {
            std::size_t const stop = std::min(order.size(), start + opts.batch);
            std::vector<std::size_t> ids(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(stop));
            Tensor z = data.measurement_rows(ids);
            Tensor v = data.state_rows(ids);
            if (transform) z = transform(model, z, v, ids);

            ad::Tape tape;
            auto vars = model.bind(tape, true);
            ad::Var out = model.forward(tape, tape.constant(z), vars);
            ad::Var loss = ad::huber(out, tape.constant(v), opts.huber_delta);
            if (!std::isfinite(loss.value()(0, 0))) report_non_finite(out.value(), v, opts.huber_delta, ids);
            tape.backward(loss);
            for (std::size_t k = 0; k < vars.size(); ++k) grads[k] = vars[k].grad();
            ad::adam_step(params, grads, adam);
        }
        record();
    }
    return history;
}

}  // namespace psse::nn
