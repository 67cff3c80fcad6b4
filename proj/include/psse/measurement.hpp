#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "psse/admittance.hpp"
#include "psse/grid_case.hpp"
#include "psse/state.hpp"

namespace psse {

enum class MeterKind { voltage_squared, p_injection, q_injection, p_flow, q_flow };
enum class FlowEnd { from, to };

struct FlowMeter {
    std::size_t branch = 0;  // row in GridCase::branches
    FlowEnd end = FlowEnd::from;

    friend bool operator==(FlowMeter const&, FlowMeter const&) = default;
};

/// Which meters exist. Bus entries are 0-based positions in GridCase::buses.
/// Measurement order is fixed: |V|², P, Q, P flows, Q flows.
struct MeasurementSelection {
    std::vector<std::size_t> v_buses;
    std::vector<std::size_t> p_buses;
    std::vector<std::size_t> q_buses;
    std::vector<FlowMeter> p_flows;
    std::vector<FlowMeter> q_flows;

    std::size_t size() const noexcept {
        return v_buses.size() + p_buses.size() + q_buses.size() + p_flows.size() + q_flows.size();
    }

    /// All squared magnitudes plus every sending-end active flow.
    static MeasurementSelection sending_end_default(GridCase const& grid);
    /// Magnitudes, P/Q injections everywhere, P/Q flows at both ends of every branch.
    static MeasurementSelection full(GridCase const& grid);
    static MeasurementSelection magnitudes_only(GridCase const& grid);

    friend bool operator==(MeasurementSelection const&, MeasurementSelection const&) = default;
};

struct NoiseConfig {
    double sigma_power = 0.02;
    double sigma_magnitude = 0.01;
    /// Add noise to |V| and square afterwards instead of perturbing |V|² directly.
    bool noise_on_modulus = false;

    void validate() const;
};

/// Quadratic measurement model: meter m reads vᵀ H_m v.
class MeasurementModel {
  public:
    using SparseMatrix = Eigen::SparseMatrix<double>;

    MeasurementModel() = default;
    MeasurementModel(AdmittanceModel const& adm, MeasurementSelection selection, NoiseConfig noise = {});

    std::size_t size() const noexcept { return matrices_.size(); }
    Eigen::Index state_dim() const noexcept { return state_dim_; }
    Eigen::Index bus_count() const noexcept { return state_dim_ / 2; }

    SparseMatrix const& matrix(std::size_t m) const { return matrices_.at(m); }
    std::vector<SparseMatrix> const& matrices() const noexcept { return matrices_; }
    MeterKind kind(std::size_t m) const { return kinds_.at(m); }
    double sigma(std::size_t m) const;
    MeasurementSelection const& selection() const noexcept { return selection_; }
    NoiseConfig const& noise() const noexcept { return noise_; }

    /// h(v): entry m is vᵀ H_m v.
    Eigen::VectorXd evaluate(StateVector const& v) const;
    /// M x 2N Jacobian; row m is 2 vᵀ H_m.
    Eigen::MatrixXd jacobian(StateVector const& v) const;
    /// Additive Gaussian noise with per-type sigma.
    Eigen::VectorXd add_noise(Eigen::VectorXd const& z, std::mt19937_64& rng) const;

  private:
    void require_state(StateVector const& v, char const* op) const;

    Eigen::Index state_dim_ = 0;
    std::vector<SparseMatrix> matrices_;
    std::vector<MeterKind> kinds_;
    MeasurementSelection selection_;
    NoiseConfig noise_;
};

MeasurementModel build_measurement_model(AdmittanceModel const& adm, MeasurementSelection const& selection,
                                         NoiseConfig const& noise = {});

inline Eigen::VectorXd evaluate_h(MeasurementModel const& mm, StateVector const& v) { return mm.evaluate(v); }
inline Eigen::MatrixXd jacobian(MeasurementModel const& mm, StateVector const& v) { return mm.jacobian(v); }

std::string to_string(MeterKind kind);

}  // namespace psse
