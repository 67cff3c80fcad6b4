#pragma once

#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "psse/grid_case.hpp"

namespace psse {

enum class ShiftKind { adjacency, laplacian, random_walk_laplacian, normalized_adjacency };
enum class EdgeWeighting { binary, admittance_magnitude };

/// Graph shift operator W used to diffuse node features. Entries vanish
/// off the network's edge set (the diagonal may be nonzero for Laplacians).
struct ShiftOperator {
    ShiftKind kind = ShiftKind::normalized_adjacency;
    EdgeWeighting weighting = EdgeWeighting::admittance_magnitude;
    Eigen::MatrixXd dense;
    Eigen::SparseMatrix<double, Eigen::RowMajor> sparse;

    Eigen::Index size() const noexcept { return dense.rows(); }

    /// Wrap an explicit matrix (used for synthetic graphs and checkpoints).
    static ShiftOperator from_dense(Eigen::MatrixXd w, ShiftKind kind = ShiftKind::adjacency,
                                    EdgeWeighting weighting = EdgeWeighting::binary);
};

/// Build W from in-service branches. Parallel branches add their weights;
/// taps are ignored. Buses with zero degree get a zero row under the
/// normalized kinds.
ShiftOperator build_shift_operator(GridCase const& grid, ShiftKind kind = ShiftKind::normalized_adjacency,
                                   EdgeWeighting weighting = EdgeWeighting::admittance_magnitude);

/// Weighted, symmetric adjacency of the network (no diagonal).
Eigen::MatrixXd weighted_adjacency(GridCase const& grid, EdgeWeighting weighting);

std::string to_string(ShiftKind kind);
std::string to_string(EdgeWeighting weighting);
ShiftKind parse_shift_kind(std::string const& name);
EdgeWeighting parse_edge_weighting(std::string const& name);

}  // namespace psse
