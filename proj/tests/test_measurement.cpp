#include <doctest.h>

#include <cmath>
#include <complex>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "psse/error.hpp"
#include "psse/measurement.hpp"

using namespace psse;
using cd = std::complex<double>;

TEST_CASE("quadratic forms match complex power arithmetic") {
    std::mt19937_64 rng(11);
    for (auto const* text : {fixtures::two_bus, fixtures::five_bus}) {
        GridCase g = parse_case(text);
        auto adm = build_admittance(g);
        auto sel = MeasurementSelection::full(g);
        auto mm = build_measurement_model(adm, sel);
        for (int trial = 0; trial < 20; ++trial) {
            auto v = fixtures::random_state(static_cast<Eigen::Index>(g.bus_count()), rng);
            Eigen::VectorXd ref = oracles::measurements(g, adm, sel, v);
            CHECK((mm.evaluate(v) - ref).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("measurement matrices are symmetric") {
    GridCase g = parse_case(fixtures::five_bus);
    auto mm = build_measurement_model(build_admittance(g), MeasurementSelection::full(g));
    for (auto const& h : mm.matrices()) {
        Eigen::MatrixXd d(h);
        CHECK((d - d.transpose()).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("meter order is magnitudes, injections, then flows") {
    GridCase g = parse_case(fixtures::five_bus);
    auto sel = MeasurementSelection::full(g);
    auto mm = build_measurement_model(build_admittance(g), sel);
    CHECK(mm.size() == 5 + 5 + 5 + 12 + 12);
    CHECK(mm.kind(0) == MeterKind::voltage_squared);
    CHECK(mm.kind(5) == MeterKind::p_injection);
    CHECK(mm.kind(10) == MeterKind::q_injection);
    CHECK(mm.kind(15) == MeterKind::p_flow);
    CHECK(mm.kind(27) == MeterKind::q_flow);
}

TEST_CASE("flat start reads unit magnitudes") {
    GridCase g = parse_case(fixtures::two_bus);
    auto mm = build_measurement_model(build_admittance(g), MeasurementSelection::magnitudes_only(g));
    CHECK(mm.evaluate(flat_start(2)).isOnes());
}

TEST_CASE("jacobian matches central differences") {
    GridCase g = parse_case(fixtures::five_bus);
    auto mm = build_measurement_model(build_admittance(g), MeasurementSelection::full(g));
    std::mt19937_64 rng(3);
    auto v = fixtures::random_state(5, rng);
    Eigen::MatrixXd j = mm.jacobian(v);
    double const h = 1e-6;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        StateVector p = v, m = v;
        p[k] += h;
        m[k] -= h;
        Eigen::VectorXd fd = (mm.evaluate(p) - mm.evaluate(m)) / (2 * h);
        CHECK((fd - j.col(k)).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("measurements are invariant to a global phase rotation") {
    GridCase g = parse_case(fixtures::five_bus);
    auto mm = build_measurement_model(build_admittance(g), MeasurementSelection::full(g));
    std::mt19937_64 rng(8);
    auto v = fixtures::random_state(5, rng);
    CHECK((mm.evaluate(rotate(v, 0.7)) - mm.evaluate(v)).cwiseAbs().maxCoeff() < 1e-12);
    // the rotation direction lies in the Jacobian null space
    Eigen::VectorXcd vc = to_complex(v);
    StateVector dir = from_complex(vc * cd(0.0, 1.0));
    CHECK((mm.jacobian(v) * dir).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("noise has the configured spread") {
    GridCase g = parse_case(fixtures::five_bus);
    NoiseConfig noise;
    noise.sigma_power = 0.02;
    noise.sigma_magnitude = 0.01;
    auto sel = MeasurementSelection::full(g);
    auto mm = build_measurement_model(build_admittance(g), sel, noise);
    Eigen::VectorXd z = mm.evaluate(flat_start(5));
    std::mt19937_64 rng(21);
    int const draws = 4000;
    double mag_sq = 0.0, pow_sq = 0.0, pow_mean = 0.0;
    for (int d = 0; d < draws; ++d) {
        Eigen::VectorXd e = mm.add_noise(z, rng) - z;
        mag_sq += e.head(5).squaredNorm();
        pow_sq += e.tail(e.size() - 5).squaredNorm();
        pow_mean += e.tail(e.size() - 5).sum();
    }
    double const n_pow = static_cast<double>(draws) * static_cast<double>(z.size() - 5);
    CHECK(std::sqrt(mag_sq / (draws * 5.0)) == doctest::Approx(0.01).epsilon(0.03));
    CHECK(std::sqrt(pow_sq / n_pow) == doctest::Approx(0.02).epsilon(0.03));
    CHECK(std::abs(pow_mean / n_pow) < 5.0 * 0.02 / std::sqrt(n_pow));
}

TEST_CASE("zero sigma leaves measurements exact") {
    GridCase g = parse_case(fixtures::five_bus);
    NoiseConfig noise;
    noise.sigma_power = 0.0;
    noise.sigma_magnitude = 0.0;
    auto mm = build_measurement_model(build_admittance(g), MeasurementSelection::full(g), noise);
    Eigen::VectorXd z = mm.evaluate(flat_start(5));
    std::mt19937_64 rng(1);
    CHECK(mm.add_noise(z, rng) == z);
}

TEST_CASE("invalid selections are rejected") {
    GridCase g = parse_case(fixtures::two_bus);
    auto adm = build_admittance(g);
    MeasurementSelection sel;
    sel.v_buses = {5};
    CHECK_THROWS_AS(build_measurement_model(adm, sel), SelectionError);
    MeasurementSelection flows;
    flows.p_flows = {{3, FlowEnd::from}};
    CHECK_THROWS_AS(build_measurement_model(adm, flows), SelectionError);
    auto mm = build_measurement_model(adm, MeasurementSelection::full(g));
    CHECK_THROWS_AS(mm.evaluate(Eigen::VectorXd::Ones(3)), ShapeError);
}
