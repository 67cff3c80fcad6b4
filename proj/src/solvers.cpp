#include "psse/solvers.hpp"

#include <cmath>
#include <sstream>

#include "psse/error.hpp"

namespace psse {

namespace {

/// Tangent of the global phase rotation at v: (−v_i, v_r) per bus.
StateVector phase_direction(StateVector const& v) {
    StateVector g(v.size());
    for (Eigen::Index n = 0; n < v.size() / 2; ++n) {
        g(2 * n) = -v(2 * n + 1);
        g(2 * n + 1) = v(2 * n);
    }
    return g;
}

Eigen::LLT<Eigen::MatrixXd> factor(Eigen::MatrixXd const& normal, double rcond_floor) {
    Eigen::LLT<Eigen::MatrixXd> llt(normal);
    double rc = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
    if (!(rc >= rcond_floor)) {
        std::ostringstream msg;
        msg << "normal matrix is singular or ill-conditioned (rcond " << rc << " < " << rcond_floor
            << "); the measurements do not determine the state, consider a regularized solve with lambda > 0";
        throw IllPosedError(msg.str());
    }
    return llt;
}

/// JᵀJ + λI. For λ = 0 the phase direction g (Jg = 0) is pinned by adding
/// s·ĝĝᵀ, which leaves every solve of a right-hand side in range(Jᵀ) unchanged.
Eigen::LLT<Eigen::MatrixXd> factor_normal(Eigen::MatrixXd const& jac, StateVector const& v, double lambda,
                                          double rcond_floor) {
    auto const dim = jac.cols();
    if (lambda == 0.0 && jac.rows() < dim - 1)
        throw IllPosedError("only " + std::to_string(jac.rows()) + " measurements for " + std::to_string(dim) +
                            " state variables (at least " + std::to_string(dim - 1) +
                            " needed); consider a regularized solve with lambda > 0");
    Eigen::MatrixXd normal = jac.transpose() * jac;
    if (lambda > 0.0) {
        normal.diagonal().array() += lambda;
    } else {
        StateVector g = phase_direction(v);
        double norm = g.norm();
        if (norm > 0.0) {
            g /= norm;
            double scale = normal.trace() / static_cast<double>(dim);
            normal += (scale > 0.0 ? scale : 1.0) * g * g.transpose();
        }
    }
    return factor(normal, rcond_floor);
}

void require_dims(Eigen::VectorXd const& z, MeasurementModel const& mm, StateVector const& v0) {
    if (z.size() != static_cast<Eigen::Index>(mm.size()))
        throw ShapeError("measurement vector has length " + std::to_string(z.size()) + ", model has " +
                         std::to_string(mm.size()) + " meters");
    if (v0.size() != mm.state_dim())
        throw ShapeError("initial state has length " + std::to_string(v0.size()) + ", expected " +
                         std::to_string(mm.state_dim()));
}

}  // namespace

void SolverOptions::validate() const {
    if (!(tolerance > 0.0)) throw ConfigError("solver tolerance must be positive");
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
    if (max_iterations < 0) throw ConfigError("max iterations must be non-negative");
}

LinearizedStep linearized_step(MeasurementModel const& mm, StateVector const& v, double lambda, double rcond_floor) {
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
    Eigen::MatrixXd jac = mm.jacobian(v);
    Eigen::MatrixXd normal = jac.transpose() * jac;
    normal.diagonal().array() += lambda;
    auto llt = factor(normal, rcond_floor);
    LinearizedStep step;
    step.gain = llt.solve(jac.transpose());
    step.prior_gain = lambda * llt.solve(Eigen::MatrixXd::Identity(jac.cols(), jac.cols()));
    step.offset = llt.solve(jac.transpose() * (jac * v - mm.evaluate(v)));
    return step;
}

SolveReport gauss_newton(Eigen::VectorXd const& z, MeasurementModel const& mm, StateVector const& v0,
                         SolverOptions const& opts) {
    opts.validate();
    require_dims(z, mm, v0);
    SolveReport report;
    StateVector v = v0;
    Eigen::VectorXd r = z - mm.evaluate(v);
    report.iterates.push_back(v);
    report.residual_norms.push_back(r.norm());
    for (int it = 0; it < opts.max_iterations; ++it) {
        Eigen::MatrixXd jac = mm.jacobian(v);
        auto llt = factor_normal(jac, v, 0.0, opts.rcond_floor);
        StateVector step = llt.solve(jac.transpose() * r);
        v += step;
        r = z - mm.evaluate(v);
        ++report.iterations;
        report.iterates.push_back(v);
        report.residual_norms.push_back(r.norm());
        report.step_norms.push_back(step.norm());
        if (!v.allFinite()) break;
        if (step.norm() <= opts.tolerance) {
            report.converged = true;
            break;
        }
    }
    report.state = v;
    return report;
}

SolveReport altmin_regularized(Eigen::VectorXd const& z, MeasurementModel const& mm, Prior const& prior,
                               StateVector const& v0, SolverOptions const& opts) {
    opts.validate();
    require_dims(z, mm, v0);
    double const lambda = opts.lambda;
    SolveReport report;
    StateVector v = v0;
    report.iterates.push_back(v);
    report.residual_norms.push_back((z - mm.evaluate(v)).norm());
    for (int it = 0; it < opts.max_iterations; ++it) {
        StateVector u = prior(v);
        if (u.size() != v.size()) throw ShapeError("prior returned a state of the wrong length");
        Eigen::MatrixXd jac = mm.jacobian(v);
        Eigen::VectorXd h = mm.evaluate(v);
        auto llt = factor_normal(jac, v, lambda, opts.rcond_floor);
        StateVector next = llt.solve(jac.transpose() * z);
        if (lambda > 0.0) next += lambda * llt.solve(u);
        next += llt.solve(jac.transpose() * (jac * v - h));
        double step = (next - v).norm();
        v = std::move(next);
        ++report.iterations;
        report.iterates.push_back(v);
        report.residual_norms.push_back((z - mm.evaluate(v)).norm());
        report.step_norms.push_back(step);
        if (!v.allFinite()) break;
        if (step <= opts.tolerance) {
            report.converged = true;
            break;
        }
    }
    report.state = v;
    return report;
}

}  // namespace psse
