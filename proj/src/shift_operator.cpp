#include "psse/shift_operator.hpp"

#include <cmath>
#include <complex>

#include "psse/error.hpp"

namespace psse {

Eigen::MatrixXd weighted_adjacency(GridCase const& grid, EdgeWeighting weighting) {
    auto const n = static_cast<Eigen::Index>(grid.bus_count());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (auto const& br : grid.branches) {
        if (!br.in_service) continue;
        auto f = static_cast<Eigen::Index>(grid.index_of(br.from_id));
        auto t = static_cast<Eigen::Index>(grid.index_of(br.to_id));
        if (f == t) continue;
        double w = weighting == EdgeWeighting::binary ? 1.0 : 1.0 / std::abs(std::complex<double>(br.r, br.x));
        a(f, t) += w;
        a(t, f) += w;
    }
    if (weighting == EdgeWeighting::binary) a = (a.array() > 0.0).cast<double>().matrix();
    return a;
}

ShiftOperator ShiftOperator::from_dense(Eigen::MatrixXd w, ShiftKind kind, EdgeWeighting weighting) {
    if (w.rows() != w.cols()) throw ShapeError("shift operator must be square");
    ShiftOperator op;
    op.kind = kind;
    op.weighting = weighting;
    op.dense = std::move(w);
    op.sparse = op.dense.sparseView();
    op.sparse.makeCompressed();
    return op;
}

ShiftOperator build_shift_operator(GridCase const& grid, ShiftKind kind, EdgeWeighting weighting) {
    Eigen::MatrixXd a = weighted_adjacency(grid, weighting);
    auto const n = a.rows();
    Eigen::VectorXd degree = a.rowwise().sum();
    Eigen::MatrixXd w(n, n);

    switch (kind) {
        case ShiftKind::adjacency:
            w = a;
            break;
        case ShiftKind::laplacian:
            w = -a;
            w.diagonal() = degree;
            break;
        case ShiftKind::random_walk_laplacian:
            w.setZero();
            for (Eigen::Index i = 0; i < n; ++i) {
                if (degree(i) <= 0.0) continue;
                w.row(i) = -a.row(i) / degree(i);
                w(i, i) = 1.0;
            }
            break;
        case ShiftKind::normalized_adjacency: {
            Eigen::VectorXd inv_sqrt = Eigen::VectorXd::Zero(n);
            for (Eigen::Index i = 0; i < n; ++i)
                if (degree(i) > 0.0) inv_sqrt(i) = 1.0 / std::sqrt(degree(i));
            w = inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
            break;
        }
    }
    return ShiftOperator::from_dense(std::move(w), kind, weighting);
}

std::string to_string(ShiftKind kind) {
    switch (kind) {
        case ShiftKind::adjacency: return "adjacency";
        case ShiftKind::laplacian: return "laplacian";
        case ShiftKind::random_walk_laplacian: return "random-walk-laplacian";
        case ShiftKind::normalized_adjacency: return "normalized-adjacency";
    }
    return "unknown";
}

std::string to_string(EdgeWeighting weighting) {
    return weighting == EdgeWeighting::binary ? "binary" : "admittance-magnitude";
}

ShiftKind parse_shift_kind(std::string const& name) {
    for (auto k : {ShiftKind::adjacency, ShiftKind::laplacian, ShiftKind::random_walk_laplacian,
                   ShiftKind::normalized_adjacency})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown shift operator kind '" + name + "'");
}

EdgeWeighting parse_edge_weighting(std::string const& name) {
    if (name == "binary") return EdgeWeighting::binary;
    if (name == "admittance-magnitude") return EdgeWeighting::admittance_magnitude;
    throw ConfigError("unknown edge weighting '" + name + "'");
}

}  // namespace psse
