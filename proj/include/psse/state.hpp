#pragma once

#include <Eigen/Dense>

namespace psse {

/// Interleaved rectangular state (v1r, v1i, ..., vNr, vNi).
using StateVector = Eigen::VectorXd;

Eigen::VectorXcd to_complex(StateVector const& v);
StateVector from_complex(Eigen::VectorXcd const& v);

/// All buses at 1∠0.
StateVector flat_start(Eigen::Index buses);

/// Apply the global phase rotation e^{jθ} to every bus.
StateVector rotate(StateVector const& v, double theta);

/// Angle θ minimizing ‖R_θ estimate − truth‖ (the argument of estimateᴴ·truth).
double phase_alignment(StateVector const& estimate, StateVector const& truth);

/// min over θ of ‖R_θ estimate − truth‖.
double aligned_error(StateVector const& estimate, StateVector const& truth);

}  // namespace psse
