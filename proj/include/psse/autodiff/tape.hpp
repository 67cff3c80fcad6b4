#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace psse::ad {

/// Dense row-major 2-D tensor. Vectors are 1 x n (a batch of row vectors is B x n).
using Tensor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseRowMajor = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseColMajor = Eigen::SparseMatrix<double>;

enum class OpKind {
    leaf,
    constant,
    matmul,
    linear,
    add,
    sub,
    add_bias,
    scale,
    add_scalar,
    relu,
    reshape,
    gather_rows,
    shift_blocks,
    quadratic_forms,
    huber,
    sum_squares,
};

std::string to_string(OpKind kind);

class Tape;

/// Handle to a node on a tape.
class Var {
  public:
    Var() = default;

    Tape& tape() const;
    std::size_t id() const noexcept { return id_; }
    bool valid() const noexcept { return tape_ != nullptr; }

    Tensor const& value() const;
    Tensor const& grad() const;
    Eigen::Index rows() const { return value().rows(); }
    Eigen::Index cols() const { return value().cols(); }

  private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Records the forward computation and replays it backwards.
///
/// Nodes are appended in creation order, which is a topological order, so
/// backward() simply walks them in reverse. Gradients of inputs used more
/// than once accumulate. A node requires a gradient if it is a leaf created
/// with `leaf()` or if any of its inputs does.
class Tape {
  public:
    /// Backward rule: given the output gradient, add into the input gradients
    /// (entries are nullptr for inputs that do not require a gradient).
    using BackwardFn = std::function<void(Tensor const& out_grad, std::span<Tensor* const> input_grads)>;

    Tape() = default;
    Tape(Tape const&) = delete;
    Tape& operator=(Tape const&) = delete;

    Var leaf(Tensor value);
    Var constant(Tensor value);

    Var record(OpKind kind, std::vector<Var> const& inputs, Tensor value, BackwardFn backward);

    Tensor const& value(Var v) const;
    /// Gradient of the last backward() target w.r.t. v (zeros if v was not reached).
    Tensor const& grad(Var v) const;
    bool requires_grad(Var v) const;
    OpKind kind(Var v) const;

    /// Reverse sweep from a scalar (1 x 1) node.
    void backward(Var loss);

    std::size_t size() const noexcept { return nodes_.size(); }

  private:
    struct Node {
        OpKind kind;
        std::vector<std::size_t> inputs;
        Tensor value;
        Tensor grad;
        bool requires_grad;
        BackwardFn backward;
    };

    Node const& node(Var v, char const* what) const;

    std::vector<Node> nodes_;
};

// --- forward ops -----------------------------------------------------------

Var matmul(Var a, Var b);                 // a (m x k) · b (k x n)
Var linear(Var x, Var weight);            // x (B x in) · weightᵀ (weight: out x in)
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var add_bias(Var x, Var bias);            // x (B x n) + bias (1 x n) broadcast over rows
Var scale(Var x, double factor);
Var add_scalar(Var x, double offset);
Var relu(Var x);                          // subgradient 0 at exactly 0
Var reshape(Var x, Eigen::Index rows, Eigen::Index cols);  // row-major reinterpretation
Var gather_rows(Var x, std::vector<Eigen::Index> const& rows);

/// x is a stack of B blocks of `shift.rows()` rows each; returns W·x_b for every block.
/// `shift` must outlive the tape.
Var shift_blocks(Var x, SparseRowMajor const& shift);

/// v (B x 2N) -> (B x M) with entry (b, m) = v_bᵀ H_m v_b. `forms` must outlive the tape.
Var quadratic_forms(Var v, std::vector<SparseColMajor> const& forms);

/// Mean over all elements of the Huber penalty of (pred − target) with threshold delta.
Var huber(Var pred, Var target, double delta = 1.0);

/// Sum of squared entries, as a 1 x 1 tensor.
Var sum_squares(Var x);

}  // namespace psse::ad
