#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "psse/measurement.hpp"
#include "psse/state.hpp"

namespace psse {

struct SolverOptions {
    int max_iterations = 20;
    double tolerance = 1e-10;  // on ‖v_{i+1} − v_i‖
    double lambda = 0.0;       // prior weight (alternating minimization only)
    double rcond_floor = 1e-12;

    void validate() const;
};

struct SolveReport {
    StateVector state;
    int iterations = 0;
    std::vector<double> residual_norms;  // ‖z − h(v_i)‖ for i = 0..iterations
    std::vector<double> step_norms;      // ‖v_{i+1} − v_i‖ for i = 0..iterations-1
    std::vector<StateVector> iterates;   // v_0 .. v_iterations
    bool converged = false;
};

/// Coefficients of one linearized data-consistency step at v:
/// v_next = gain·z + prior_gain·u + offset.
struct LinearizedStep {
    Eigen::MatrixXd gain;        // (JᵀJ + λI)⁻¹ Jᵀ
    Eigen::MatrixXd prior_gain;  // λ (JᵀJ + λI)⁻¹
    Eigen::VectorXd offset;      // (JᵀJ + λI)⁻¹ Jᵀ (J v − h(v))
};

/// Closed-form coefficients at v with λ > 0. Throws IllPosedError when
/// JᵀJ + λI is numerically singular (always the case for λ = 0, since the
/// global phase direction lies in the null space of J).
LinearizedStep linearized_step(MeasurementModel const& mm, StateVector const& v, double lambda,
                               double rcond_floor = 1e-12);

/// Plain Gauss-Newton: v_{i+1} = v_i + (JᵀJ)⁻¹ Jᵀ (z − h(v_i)). The normal
/// matrix is made invertible on the complement of the phase direction J·(jv) = 0,
/// so each step is the minimum-norm solution of the linearized problem.
SolveReport gauss_newton(Eigen::VectorXd const& z, MeasurementModel const& mm, StateVector const& v0,
                         SolverOptions const& opts = {});

using Prior = std::function<StateVector(StateVector const&)>;

/// Alternating minimization for ‖z − h(v)‖² + λ‖v − prior(v)‖²:
/// u_i = prior(v_i), v_{i+1} = A_i z + B_i u_i + b_i. With λ = 0 it takes the
/// same phase-fixed normal matrix as gauss_newton.
SolveReport altmin_regularized(Eigen::VectorXd const& z, MeasurementModel const& mm, Prior const& prior,
                               StateVector const& v0, SolverOptions const& opts = {});

}  // namespace psse
