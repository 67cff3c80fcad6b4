#pragma once

#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "psse/admittance.hpp"
#include "psse/grid_case.hpp"
#include "psse/measurement.hpp"
#include "psse/nn/gnn.hpp"
#include "psse/shift_operator.hpp"
#include "psse/state.hpp"

namespace oracles {

/// Meter readings by direct complex power arithmetic, independent of the quadratic forms.
inline Eigen::VectorXd measurements(psse::GridCase const& g, psse::AdmittanceModel const& adm,
                                    psse::MeasurementSelection const& sel, psse::StateVector const& v) {
    using cd = std::complex<double>;
    Eigen::VectorXcd vc = psse::to_complex(v);
    Eigen::VectorXcd s = vc.cwiseProduct((adm.y * vc).conjugate());
    auto flow = [&](psse::FlowMeter const& f) {
        auto const& br = g.branches[f.branch];
        cd const a = std::polar(br.tap, br.shift);
        cd const ys = 1.0 / cd(br.r, br.x);
        cd const half(0.0, br.b / 2.0);
        cd const vf = vc[static_cast<Eigen::Index>(g.from_index(f.branch))];
        cd const vt = vc[static_cast<Eigen::Index>(g.to_index(f.branch))];
        if (f.end == psse::FlowEnd::from) {
            cd const i = (ys + half) / std::norm(a) * vf - ys / std::conj(a) * vt;
            return vf * std::conj(i);
        }
        cd const i = -ys / a * vf + (ys + half) * vt;
        return vt * std::conj(i);
    };
    std::vector<double> out;
    for (auto b : sel.v_buses) out.push_back(std::norm(vc[static_cast<Eigen::Index>(b)]));
    for (auto b : sel.p_buses) out.push_back(s[static_cast<Eigen::Index>(b)].real());
    for (auto b : sel.q_buses) out.push_back(s[static_cast<Eigen::Index>(b)].imag());
    for (auto const& f : sel.p_flows) out.push_back(flow(f).real());
    for (auto const& f : sel.q_flows) out.push_back(flow(f).imag());
    return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

inline psse::ShiftOperator random_graph(Eigen::Index n, double density, std::mt19937_64& rng) {
    std::bernoulli_distribution edge(density);
    std::uniform_real_distribution<double> weight(0.2, 1.0);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (edge(rng)) w(i, j) = w(j, i) = weight(rng);
    return psse::ShiftOperator::from_dense(w);
}

/// Hop distance by repeated boolean products; entries beyond the diameter stay at n.
inline Eigen::MatrixXi hop_distance(Eigen::MatrixXd const& w) {
    auto const n = w.rows();
    Eigen::MatrixXi d = Eigen::MatrixXi::Constant(n, n, static_cast<int>(n));
    Eigen::MatrixXd reach = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd adj = (w.array() != 0.0).cast<double>();
    for (int k = 0; k < n; ++k) {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (reach(i, j) != 0.0 && d(i, j) == n) d(i, j) = k;
        reach = ((reach * adj + reach).array() != 0.0).cast<double>();
    }
    return d;
}

inline psse::nn::GnnConfig random_gnn_config(std::mt19937_64& rng) {
    using psse::nn::Activation;
    std::uniform_int_distribution<int> layers(1, 4), hops(1, 4), width(1, 10);
    psse::nn::GnnConfig cfg;
    int const l = layers(rng);
    cfg.widths = {2};
    cfg.hops.clear();
    cfg.activations.clear();
    for (int i = 0; i < l; ++i) {
        cfg.hops.push_back(hops(rng));
        cfg.widths.push_back(i + 1 == l ? 2 : width(rng));
        cfg.activations.push_back(i + 1 == l ? Activation::linear : Activation::relu);
    }
    return cfg;
}

/// Σ_k W^k X H_k with explicit dense matrix powers.
inline Eigen::MatrixXd graph_conv(Eigen::MatrixXd const& w, Eigen::MatrixXd const& x,
                                  std::vector<psse::nn::Tensor> const& taps) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), taps.front().cols());
    for (std::size_t k = 0; k < taps.size(); ++k) {
        Eigen::MatrixXd wk = Eigen::MatrixXd::Identity(w.rows(), w.cols());
        for (std::size_t p = 0; p < k; ++p) wk = wk * w;
        out += wk * x * Eigen::MatrixXd(taps[k]);
    }
    return out;
}

}  // namespace oracles
