#include "psse/measurement.hpp"

#include <cmath>

#include "psse/error.hpp"

namespace psse {

namespace {

using Triplet = Eigen::Triplet<double>;

/// Accumulates the bilinear forms Re/Im{V_a · conj(c · V_b)} into an
/// (unsymmetrized) coefficient list over the interleaved state.
class QuadraticStamp {
  public:
    void real_part(std::size_t a, std::size_t b, Complex c) {
        // g(ar br + ai bi) + s(ai br − ar bi)
        add(a, 0, b, 0, c.real());
        add(a, 1, b, 1, c.real());
        add(a, 1, b, 0, c.imag());
        add(a, 0, b, 1, -c.imag());
    }

    void imag_part(std::size_t a, std::size_t b, Complex c) {
        // g(ai br − ar bi) − s(ar br + ai bi)
        add(a, 1, b, 0, c.real());
        add(a, 0, b, 1, -c.real());
        add(a, 0, b, 0, -c.imag());
        add(a, 1, b, 1, -c.imag());
    }

    MeasurementModel::SparseMatrix symmetric(Eigen::Index dim) const {
        MeasurementModel::SparseMatrix m(dim, dim);
        m.setFromTriplets(triplets_.begin(), triplets_.end());
        MeasurementModel::SparseMatrix t = m.transpose();
        MeasurementModel::SparseMatrix h = 0.5 * (m + t);
        h.prune(0.0);
        h.makeCompressed();
        return h;
    }

  private:
    void add(std::size_t a, int pa, std::size_t b, int pb, double value) {
        if (value == 0.0) return;
        triplets_.emplace_back(static_cast<Eigen::Index>(2 * a + pa), static_cast<Eigen::Index>(2 * b + pb), value);
    }

    std::vector<Triplet> triplets_;
};

void check_bus(std::size_t bus, std::size_t n, char const* what) {
    if (bus >= n)
        throw SelectionError(std::string(what) + " meter on nonexistent bus position " + std::to_string(bus));
}

BranchAdmittance const& check_flow(AdmittanceModel const& adm, FlowMeter const& meter, char const* what) {
    auto const* line = adm.find_branch(meter.branch);
    if (!line)
        throw SelectionError(std::string(what) + " meter on nonexistent or out-of-service branch " +
                             std::to_string(meter.branch));
    return *line;
}

void stamp_flow(QuadraticStamp& stamp, BranchAdmittance const& line, FlowEnd end, bool active) {
    auto emit = [&](std::size_t a, std::size_t b, Complex c) {
        if (active)
            stamp.real_part(a, b, c);
        else
            stamp.imag_part(a, b, c);
    };
    if (end == FlowEnd::from) {
        emit(line.from, line.from, line.yff);
        emit(line.from, line.to, line.yft);
    } else {
        emit(line.to, line.from, line.ytf);
        emit(line.to, line.to, line.ytt);
    }
}

void stamp_injection(QuadraticStamp& stamp, AdmittanceModel const& adm, std::size_t bus, bool active) {
    auto const n = static_cast<Eigen::Index>(bus);
    for (Eigen::Index k = 0; k < adm.y.cols(); ++k) {
        Complex c = adm.y(n, k);
        if (c == Complex(0.0)) continue;
        if (active)
            stamp.real_part(bus, static_cast<std::size_t>(k), c);
        else
            stamp.imag_part(bus, static_cast<std::size_t>(k), c);
    }
}

}  // namespace

MeasurementSelection MeasurementSelection::sending_end_default(GridCase const& grid) {
    MeasurementSelection sel;
    for (std::size_t i = 0; i < grid.bus_count(); ++i) sel.v_buses.push_back(i);
    for (std::size_t k = 0; k < grid.branch_count(); ++k)
        if (grid.branches[k].in_service) sel.p_flows.push_back({k, FlowEnd::from});
    return sel;
}

MeasurementSelection MeasurementSelection::full(GridCase const& grid) {
    MeasurementSelection sel;
    for (std::size_t i = 0; i < grid.bus_count(); ++i) {
        sel.v_buses.push_back(i);
        sel.p_buses.push_back(i);
        sel.q_buses.push_back(i);
    }
    for (std::size_t k = 0; k < grid.branch_count(); ++k) {
        if (!grid.branches[k].in_service) continue;
        for (auto end : {FlowEnd::from, FlowEnd::to}) {
            sel.p_flows.push_back({k, end});
            sel.q_flows.push_back({k, end});
        }
    }
    return sel;
}

MeasurementSelection MeasurementSelection::magnitudes_only(GridCase const& grid) {
    MeasurementSelection sel;
    for (std::size_t i = 0; i < grid.bus_count(); ++i) sel.v_buses.push_back(i);
    return sel;
}

void NoiseConfig::validate() const {
    if (!(sigma_power >= 0.0) || !(sigma_magnitude >= 0.0))
        throw ConfigError("noise standard deviations must be non-negative");
}

MeasurementModel::MeasurementModel(AdmittanceModel const& adm, MeasurementSelection selection, NoiseConfig noise)
    : state_dim_(2 * static_cast<Eigen::Index>(adm.bus_count())),
      selection_(std::move(selection)),
      noise_(noise) {
    noise_.validate();
    auto const n = adm.bus_count();
    if (selection_.size() == 0) throw SelectionError("measurement selection is empty");

    auto push = [&](QuadraticStamp const& stamp, MeterKind kind) {
        matrices_.push_back(stamp.symmetric(state_dim_));
        kinds_.push_back(kind);
    };

    for (auto bus : selection_.v_buses) {
        check_bus(bus, n, "voltage");
        QuadraticStamp stamp;
        stamp.real_part(bus, bus, Complex(1.0, 0.0));  // Re{V conj(V)} = |V|²
        push(stamp, MeterKind::voltage_squared);
    }
    for (auto bus : selection_.p_buses) {
        check_bus(bus, n, "active injection");
        QuadraticStamp stamp;
        stamp_injection(stamp, adm, bus, true);
        push(stamp, MeterKind::p_injection);
    }
    for (auto bus : selection_.q_buses) {
        check_bus(bus, n, "reactive injection");
        QuadraticStamp stamp;
        stamp_injection(stamp, adm, bus, false);
        push(stamp, MeterKind::q_injection);
    }
    for (auto const& meter : selection_.p_flows) {
        QuadraticStamp stamp;
        stamp_flow(stamp, check_flow(adm, meter, "active flow"), meter.end, true);
        push(stamp, MeterKind::p_flow);
    }
    for (auto const& meter : selection_.q_flows) {
        QuadraticStamp stamp;
        stamp_flow(stamp, check_flow(adm, meter, "reactive flow"), meter.end, false);
        push(stamp, MeterKind::q_flow);
    }
}

double MeasurementModel::sigma(std::size_t m) const {
    return kind(m) == MeterKind::voltage_squared ? noise_.sigma_magnitude : noise_.sigma_power;
}

void MeasurementModel::require_state(StateVector const& v, char const* op) const {
    if (v.size() != state_dim_)
        throw ShapeError(std::string(op) + ": state has length " + std::to_string(v.size()) + ", expected " +
                         std::to_string(state_dim_));
}

Eigen::VectorXd MeasurementModel::evaluate(StateVector const& v) const {
    require_state(v, "evaluate_h");
    Eigen::VectorXd h(static_cast<Eigen::Index>(size()));
    for (std::size_t m = 0; m < size(); ++m) h(static_cast<Eigen::Index>(m)) = v.dot(matrices_[m] * v);
    return h;
}

Eigen::MatrixXd MeasurementModel::jacobian(StateVector const& v) const {
    require_state(v, "jacobian");
    Eigen::MatrixXd j(static_cast<Eigen::Index>(size()), state_dim_);
    for (std::size_t m = 0; m < size(); ++m) j.row(static_cast<Eigen::Index>(m)) = 2.0 * (matrices_[m] * v).transpose();
    return j;
}

Eigen::VectorXd MeasurementModel::add_noise(Eigen::VectorXd const& z, std::mt19937_64& rng) const {
    if (z.size() != static_cast<Eigen::Index>(size()))
        throw ShapeError("add_noise: measurement vector has length " + std::to_string(z.size()) + ", expected " +
                         std::to_string(size()));
    std::normal_distribution<double> standard(0.0, 1.0);
    Eigen::VectorXd out = z;
    for (std::size_t m = 0; m < size(); ++m) {
        auto i = static_cast<Eigen::Index>(m);
        double s = sigma(m);
        double e = standard(rng);
        if (s == 0.0) continue;
        if (noise_.noise_on_modulus && kinds_[m] == MeterKind::voltage_squared) {
            double modulus = std::sqrt(std::max(z(i), 0.0)) + s * e;
            out(i) = modulus * modulus;
        } else {
            out(i) = z(i) + s * e;
        }
    }
    return out;
}

MeasurementModel build_measurement_model(AdmittanceModel const& adm, MeasurementSelection const& selection,
                                         NoiseConfig const& noise) {
    return MeasurementModel(adm, selection, noise);
}

std::string to_string(MeterKind kind) {
    switch (kind) {
        case MeterKind::voltage_squared: return "v2";
        case MeterKind::p_injection: return "p";
        case MeterKind::q_injection: return "q";
        case MeterKind::p_flow: return "pf";
        case MeterKind::q_flow: return "qf";
    }
    return "unknown";
}

}  // namespace psse
