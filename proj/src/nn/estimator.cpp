#include "psse/nn/estimator.hpp"

#include "psse/error.hpp"

namespace psse::nn {

std::vector<ad::Var> Estimator::bind(ad::Tape& tape, bool trainable) const {
    std::vector<ad::Var> vars;
    for (auto const* p : parameters()) vars.push_back(trainable ? tape.leaf(*p) : tape.constant(*p));
    return vars;
}

Eigen::MatrixXd Estimator::predict(Eigen::MatrixXd const& z_rows) const {
    if (z_rows.cols() != measurement_dim())
        throw ShapeError("predict: " + std::to_string(z_rows.cols()) + " measurements per row, model expects " +
                         std::to_string(measurement_dim()));
    ad::Tape tape;
    auto params = bind(tape, false);
    ad::Var out = forward(tape, tape.constant(Tensor(z_rows)), params);
    return Eigen::MatrixXd(out.value());
}

StateVector Estimator::predict(Eigen::VectorXd const& z) const {
    Eigen::MatrixXd rows = z.transpose();
    return predict(rows).row(0).transpose();
}

std::size_t Estimator::parameter_count() const {
    std::size_t n = 0;
    for (auto const* p : parameters()) n += static_cast<std::size_t>(p->size());
    return n;
}

}  // namespace psse::nn
