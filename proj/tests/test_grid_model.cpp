#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "fixtures.hpp"
#include "psse/admittance.hpp"
#include "psse/error.hpp"
#include "psse/shift_operator.hpp"

using namespace psse;
using cd = std::complex<double>;

namespace {

// Textbook stamping, one branch at a time, from the current equations of an
// ideal transformer (ratio t e^{jφ} at the from end) in series with the line.
Eigen::MatrixXcd naive_ybus(GridCase const& g) {
    auto const n = static_cast<Eigen::Index>(g.bus_count());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t k = 0; k < g.branch_count(); ++k) {
        auto const& br = g.branches[k];
        if (!br.in_service) continue;
        auto f = static_cast<Eigen::Index>(g.from_index(k));
        auto t = static_cast<Eigen::Index>(g.to_index(k));
        cd const z(br.r, br.x);
        cd const ys = 1.0 / z;
        cd const a = std::polar(br.tap, br.shift);
        cd const half = cd(0.0, br.b / 2.0);
        y(f, f) += (ys + half) / (std::abs(a) * std::abs(a));
        y(f, t) += -ys / std::conj(a);
        y(t, f) += -ys / a;
        y(t, t) += ys + half;
    }
    for (Eigen::Index i = 0; i < n; ++i) y(i, i) += cd(g.buses[i].gs, g.buses[i].bs);
    return y;
}

}  // namespace

TEST_CASE("bus admittance matches an independent re-stamp") {
    for (auto const* text : {fixtures::two_bus, fixtures::five_bus}) {
        GridCase g = parse_case(text);
        auto adm = build_admittance(g);
        CHECK((adm.y - naive_ybus(g)).cwiseAbs().maxCoeff() < 1e-12);
    }
    GridCase g = load_case_file(fixtures::data_path("case118.m"));
    auto adm = build_admittance(g);
    CHECK((adm.y - naive_ybus(g)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("two-bus admittance by hand") {
    GridCase g = parse_case(fixtures::two_bus);
    auto adm = build_admittance(g);
    cd const ys = 1.0 / cd(0.01, 0.1);
    CHECK(std::abs(adm.y(0, 1) + ys) < 1e-14);
    CHECK(std::abs(adm.y(1, 1) - (ys + cd(0, 0.01))) < 1e-14);
    CHECK(adm.lines.size() == 1);
    CHECK(adm.find_branch(0) != nullptr);
}

TEST_CASE("lossless network without shifters has symmetric Y") {
    GridCase g = parse_case(fixtures::five_bus);
    g.branches[3].shift = 0.0;
    g.finalize();
    auto adm = build_admittance(g);
    CHECK((adm.y - adm.y.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("out-of-service branches are skipped") {
    GridCase g = parse_case(fixtures::five_bus);
    g.branches[5].in_service = false;
    g.finalize();
    auto adm = build_admittance(g);
    CHECK(adm.lines.size() == 5);
    CHECK(adm.find_branch(5) == nullptr);
    CHECK(adm.y(1, 3) == cd(0.0, 0.0));
}

TEST_CASE("isolated bus is reported") {
    GridCase g = parse_case(fixtures::five_bus);
    g.branches[2].in_service = false;
    g.branches[3].in_service = false;
    g.branches[5].in_service = false;
    g.finalize();
    auto adm = build_admittance(g);
    CHECK_FALSE(adm.warnings.empty());
}

TEST_CASE("normalized adjacency is symmetric with spectrum in [-1, 1]") {
    GridCase g = load_case_file(fixtures::data_path("case14.m"));
    auto w = build_shift_operator(g, ShiftKind::normalized_adjacency, EdgeWeighting::admittance_magnitude);
    CHECK((w.dense - w.dense.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w.dense);
    CHECK(es.eigenvalues().maxCoeff() <= 1.0 + 1e-12);
    CHECK(es.eigenvalues().minCoeff() >= -1.0 - 1e-12);
    CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(1.0));
}

TEST_CASE("shift operator vanishes off the edge set") {
    GridCase g = parse_case(fixtures::five_bus);
    Eigen::MatrixXd adj = weighted_adjacency(g, EdgeWeighting::binary);
    for (auto kind : {ShiftKind::adjacency, ShiftKind::laplacian, ShiftKind::random_walk_laplacian,
                      ShiftKind::normalized_adjacency}) {
        auto w = build_shift_operator(g, kind, EdgeWeighting::admittance_magnitude);
        for (Eigen::Index i = 0; i < 5; ++i)
            for (Eigen::Index j = 0; j < 5; ++j)
                if (i != j && adj(i, j) == 0.0) CHECK(w.dense(i, j) == 0.0);
        CHECK((Eigen::MatrixXd(w.sparse) - w.dense).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("laplacian rows sum to zero and binary adjacency counts edges") {
    GridCase g = parse_case(fixtures::five_bus);
    auto l = build_shift_operator(g, ShiftKind::laplacian, EdgeWeighting::binary);
    CHECK(l.dense.rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
    CHECK(l.dense(1, 1) == 3.0);
    auto rw = build_shift_operator(g, ShiftKind::random_walk_laplacian, EdgeWeighting::binary);
    CHECK(rw.dense.diagonal().isOnes());
    auto a = build_shift_operator(g, ShiftKind::adjacency, EdgeWeighting::admittance_magnitude);
    CHECK(a.dense(0, 1) == doctest::Approx(1.0 / std::abs(cd(0.02, 0.06))));
}

TEST_CASE("shift kind names round-trip") {
    for (auto kind : {ShiftKind::adjacency, ShiftKind::laplacian, ShiftKind::random_walk_laplacian,
                      ShiftKind::normalized_adjacency})
        CHECK(parse_shift_kind(to_string(kind)) == kind);
    CHECK_THROWS_AS(parse_shift_kind("bogus"), ConfigError);
}
