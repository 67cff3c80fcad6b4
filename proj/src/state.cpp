#include "psse/state.hpp"

#include <cmath>
#include <complex>

#include "psse/error.hpp"

namespace psse {

namespace {

void require_even(StateVector const& v) {
    if (v.size() % 2 != 0) throw ShapeError("state vector length must be even, got " + std::to_string(v.size()));
}

}  // namespace

Eigen::VectorXcd to_complex(StateVector const& v) {
    require_even(v);
    Eigen::VectorXcd out(v.size() / 2);
    for (Eigen::Index n = 0; n < out.size(); ++n) out(n) = {v(2 * n), v(2 * n + 1)};
    return out;
}

StateVector from_complex(Eigen::VectorXcd const& v) {
    StateVector out(2 * v.size());
    for (Eigen::Index n = 0; n < v.size(); ++n) {
        out(2 * n) = v(n).real();
        out(2 * n + 1) = v(n).imag();
    }
    return out;
}

StateVector flat_start(Eigen::Index buses) {
    StateVector v = StateVector::Zero(2 * buses);
    for (Eigen::Index n = 0; n < buses; ++n) v(2 * n) = 1.0;
    return v;
}

StateVector rotate(StateVector const& v, double theta) {
    require_even(v);
    double const c = std::cos(theta);
    double const s = std::sin(theta);
    StateVector out(v.size());
    for (Eigen::Index n = 0; n < v.size() / 2; ++n) {
        double re = v(2 * n);
        double im = v(2 * n + 1);
        out(2 * n) = c * re - s * im;
        out(2 * n + 1) = s * re + c * im;
    }
    return out;
}

double phase_alignment(StateVector const& estimate, StateVector const& truth) {
    if (estimate.size() != truth.size()) throw ShapeError("phase_alignment: state lengths differ");
    // ‖e^{jθ}a − b‖² = ‖a‖² + ‖b‖² − 2 Re(e^{−jθ} s) with s = Σ conj(a_n) b_n; minimized at θ = arg(s).
    std::complex<double> inner = 0.0;
    auto a = to_complex(estimate);
    auto b = to_complex(truth);
    for (Eigen::Index n = 0; n < a.size(); ++n) inner += std::conj(a(n)) * b(n);
    return inner == 0.0 ? 0.0 : std::arg(inner);
}

double aligned_error(StateVector const& estimate, StateVector const& truth) {
    return (rotate(estimate, phase_alignment(estimate, truth)) - truth).norm();
}

}  // namespace psse
