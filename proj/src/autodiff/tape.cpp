#include "psse/autodiff/tape.hpp"

#include <cmath>

#include "psse/error.hpp"

namespace psse::ad {

namespace {

std::string shape(Tensor const& t) { return "(" + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + ")"; }

[[noreturn]] void shape_error(char const* op, Tensor const& a, Tensor const& b) {
    throw ShapeError(std::string(op) + ": shapes " + shape(a) + " and " + shape(b) + " are incompatible");
}

Tape& same_tape(Var a, Var b, char const* op) {
    if (!a.valid() || !b.valid() || &a.tape() != &b.tape())
        throw UsageError(std::string(op) + ": operands are not recorded on the same tape");
    return a.tape();
}

Tape& tape_of(Var a, char const* op) {
    if (!a.valid()) throw UsageError(std::string(op) + ": operand is not recorded on a tape");
    return a.tape();
}

}  // namespace

std::string to_string(OpKind kind) {
    switch (kind) {
        case OpKind::leaf: return "leaf";
        case OpKind::constant: return "constant";
        case OpKind::matmul: return "matmul";
        case OpKind::linear: return "linear";
        case OpKind::add: return "add";
        case OpKind::sub: return "sub";
        case OpKind::add_bias: return "add_bias";
        case OpKind::scale: return "scale";
        case OpKind::add_scalar: return "add_scalar";
        case OpKind::relu: return "relu";
        case OpKind::reshape: return "reshape";
        case OpKind::gather_rows: return "gather_rows";
        case OpKind::shift_blocks: return "shift_blocks";
        case OpKind::quadratic_forms: return "quadratic_forms";
        case OpKind::huber: return "huber";
        case OpKind::sum_squares: return "sum_squares";
    }
    return "unknown";
}

Tape& Var::tape() const {
    if (!tape_) throw UsageError("variable is not recorded on a tape");
    return *tape_;
}

Tensor const& Var::value() const { return tape().value(*this); }
Tensor const& Var::grad() const { return tape().grad(*this); }

Var Tape::leaf(Tensor value) {
    nodes_.push_back({OpKind::leaf, {}, std::move(value), Tensor(), true, nullptr});
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
    nodes_.push_back({OpKind::constant, {}, std::move(value), Tensor(), false, nullptr});
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(OpKind kind, std::vector<Var> const& inputs, Tensor value, BackwardFn backward) {
    Node n{kind, {}, std::move(value), Tensor(), false, nullptr};
    for (auto const& in : inputs) {
        node(in, to_string(kind).c_str());
        n.inputs.push_back(in.id());
        n.requires_grad = n.requires_grad || nodes_[in.id()].requires_grad;
    }
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

Tape::Node const& Tape::node(Var v, char const* what) const {
    if (v.tape_ != this || v.id_ >= nodes_.size())
        throw UsageError(std::string(what) + ": variable was not recorded on this tape");
    return nodes_[v.id_];
}

Tensor const& Tape::value(Var v) const { return node(v, "value").value; }

Tensor const& Tape::grad(Var v) const {
    auto& n = const_cast<Node&>(node(v, "grad"));
    if (n.grad.size() != n.value.size()) n.grad = Tensor::Zero(n.value.rows(), n.value.cols());
    return n.grad;
}

bool Tape::requires_grad(Var v) const { return node(v, "requires_grad").requires_grad; }
OpKind Tape::kind(Var v) const { return node(v, "kind").kind; }

void Tape::backward(Var loss) {
    auto const& target = node(loss, "backward");
    if (target.value.rows() != 1 || target.value.cols() != 1)
        throw UsageError("backward: loss must be a 1x1 tensor, got " + shape(target.value));
    for (auto& n : nodes_) n.grad.resize(0, 0);
    nodes_[loss.id_].grad = Tensor::Ones(1, 1);

    std::vector<Tensor*> input_grads;
    for (std::size_t i = loss.id_ + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad || !n.backward || n.grad.size() == 0) continue;
        input_grads.clear();
        for (auto in : n.inputs) {
            Node& src = nodes_[in];
            if (!src.requires_grad) {
                input_grads.push_back(nullptr);
                continue;
            }
            if (src.grad.size() != src.value.size()) src.grad = Tensor::Zero(src.value.rows(), src.value.cols());
            input_grads.push_back(&src.grad);
        }
        n.backward(n.grad, input_grads);
    }
}

// --- ops ---------------------------------------------------------------------

Var matmul(Var a, Var b) {
    Tape& t = same_tape(a, b, "matmul");
    Tensor const& av = a.value();
    Tensor const& bv = b.value();
    if (av.cols() != bv.rows()) shape_error("matmul", av, bv);
    return t.record(OpKind::matmul, {a, b}, av * bv, [a, b](Tensor const& g, std::span<Tensor* const> grads) {
        if (grads[0]) grads[0]->noalias() += g * b.value().transpose();
        if (grads[1]) grads[1]->noalias() += a.value().transpose() * g;
    });
}

Var linear(Var x, Var weight) {
    Tape& t = same_tape(x, weight, "linear");
    Tensor const& xv = x.value();
    Tensor const& wv = weight.value();
    if (xv.cols() != wv.cols()) shape_error("linear", xv, wv);
    return t.record(OpKind::linear, {x, weight}, xv * wv.transpose(),
                    [x, weight](Tensor const& g, std::span<Tensor* const> grads) {
                        if (grads[0]) grads[0]->noalias() += g * weight.value();
                        if (grads[1]) grads[1]->noalias() += g.transpose() * x.value();
                    });
}

Var add(Var a, Var b) {
    Tape& t = same_tape(a, b, "add");
    if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error("add", a.value(), b.value());
    return t.record(OpKind::add, {a, b}, a.value() + b.value(), [](Tensor const& g, std::span<Tensor* const> grads) {
        if (grads[0]) *grads[0] += g;
        if (grads[1]) *grads[1] += g;
    });
}

Var sub(Var a, Var b) {
    Tape& t = same_tape(a, b, "sub");
    if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error("sub", a.value(), b.value());
    return t.record(OpKind::sub, {a, b}, a.value() - b.value(), [](Tensor const& g, std::span<Tensor* const> grads) {
        if (grads[0]) *grads[0] += g;
        if (grads[1]) *grads[1] -= g;
    });
}

Var add_bias(Var x, Var bias) {
    Tape& t = same_tape(x, bias, "add_bias");
    Tensor const& xv = x.value();
    Tensor const& bv = bias.value();
    if (bv.rows() != 1 || bv.cols() != xv.cols()) shape_error("add_bias", xv, bv);
    Tensor out = xv.rowwise() + bv.row(0);
    return t.record(OpKind::add_bias, {x, bias}, std::move(out), [](Tensor const& g, std::span<Tensor* const> grads) {
        if (grads[0]) *grads[0] += g;
        if (grads[1]) *grads[1] += g.colwise().sum();
    });
}

Var scale(Var x, double factor) {
    Tape& t = tape_of(x, "scale");
    return t.record(OpKind::scale, {x}, factor * x.value(), [factor](Tensor const& g, std::span<Tensor* const> grads) {
        if (grads[0]) *grads[0] += factor * g;
    });
}

Var add_scalar(Var x, double offset) {
    Tape& t = tape_of(x, "add_scalar");
    Tensor out = x.value().array() + offset;
    return t.record(OpKind::add_scalar, {x}, std::move(out), [](Tensor const& g, std::span<Tensor* const> grads) {
        if (grads[0]) *grads[0] += g;
    });
}

Var relu(Var x) {
    Tape& t = tape_of(x, "relu");
    Tensor out = x.value().cwiseMax(0.0);
    return t.record(OpKind::relu, {x}, std::move(out), [x](Tensor const& g, std::span<Tensor* const> grads) {
        if (grads[0]) grads[0]->array() += (x.value().array() > 0.0).select(g.array(), 0.0);
    });
}

Var reshape(Var x, Eigen::Index rows, Eigen::Index cols) {
    Tape& t = tape_of(x, "reshape");
    Tensor const& xv = x.value();
    if (rows * cols != xv.size())
        throw ShapeError("reshape: cannot view " + shape(xv) + " as (" + std::to_string(rows) + "x" +
                         std::to_string(cols) + ")");
    Tensor out = Eigen::Map<Tensor const>(xv.data(), rows, cols);
    auto in_rows = xv.rows();
    auto in_cols = xv.cols();
    return t.record(OpKind::reshape, {x}, std::move(out),
                    [in_rows, in_cols](Tensor const& g, std::span<Tensor* const> grads) {
                        if (grads[0]) *grads[0] += Eigen::Map<Tensor const>(g.data(), in_rows, in_cols);
                    });
}

Var gather_rows(Var x, std::vector<Eigen::Index> const& rows) {
    Tape& t = tape_of(x, "gather_rows");
    Tensor const& xv = x.value();
    Tensor out(static_cast<Eigen::Index>(rows.size()), xv.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] < 0 || rows[r] >= xv.rows())
            throw ShapeError("gather_rows: row " + std::to_string(rows[r]) + " out of range for " + shape(xv));
        out.row(static_cast<Eigen::Index>(r)) = xv.row(rows[r]);
    }
    return t.record(OpKind::gather_rows, {x}, std::move(out), [rows](Tensor const& g, std::span<Tensor* const> grads) {
        if (!grads[0]) return;
        for (std::size_t r = 0; r < rows.size(); ++r) grads[0]->row(rows[r]) += g.row(static_cast<Eigen::Index>(r));
    });
}

Var shift_blocks(Var x, SparseRowMajor const& shift) {
    Tape& t = tape_of(x, "shift_blocks");
    Tensor const& xv = x.value();
    auto const n = shift.rows();
    if (shift.cols() != n || n == 0 || xv.rows() % n != 0)
        throw ShapeError("shift_blocks: " + shape(xv) + " is not a stack of " + std::to_string(n) + "-row blocks");
    auto const blocks = xv.rows() / n;
    Tensor out(xv.rows(), xv.cols());
    for (Eigen::Index b = 0; b < blocks; ++b) out.middleRows(b * n, n).noalias() = shift * xv.middleRows(b * n, n);
    SparseRowMajor const* w = &shift;
    return t.record(OpKind::shift_blocks, {x}, std::move(out),
                    [w, n, blocks](Tensor const& g, std::span<Tensor* const> grads) {
                        if (!grads[0]) return;
                        for (Eigen::Index b = 0; b < blocks; ++b)
                            grads[0]->middleRows(b * n, n).noalias() += w->transpose() * g.middleRows(b * n, n);
                    });
}

Var quadratic_forms(Var v, std::vector<SparseColMajor> const& forms) {
    Tape& t = tape_of(v, "quadratic_forms");
    Tensor const& vv = v.value();
    auto const m = static_cast<Eigen::Index>(forms.size());
    for (auto const& h : forms)
        if (h.rows() != vv.cols() || h.cols() != vv.cols())
            throw ShapeError("quadratic_forms: state width " + std::to_string(vv.cols()) + " does not match a " +
                             std::to_string(h.rows()) + "x" + std::to_string(h.cols()) + " form");
    Tensor out(vv.rows(), m);
    for (Eigen::Index b = 0; b < vv.rows(); ++b) {
        Eigen::VectorXd x = vv.row(b).transpose();
        for (Eigen::Index k = 0; k < m; ++k) out(b, k) = x.dot(forms[static_cast<std::size_t>(k)] * x);
    }
    auto const* hs = &forms;
    return t.record(OpKind::quadratic_forms, {v}, std::move(out), [v, hs](Tensor const& g, std::span<Tensor* const> grads) {
        if (!grads[0]) return;
        Tensor const& vv = v.value();
        for (Eigen::Index b = 0; b < vv.rows(); ++b) {
            Eigen::VectorXd x = vv.row(b).transpose();
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(x.size());
            for (std::size_t k = 0; k < hs->size(); ++k)
                acc += (2.0 * g(b, static_cast<Eigen::Index>(k))) * ((*hs)[k] * x);
            grads[0]->row(b) += acc.transpose();
        }
    });
}

Var huber(Var pred, Var target, double delta) {
    Tape& t = same_tape(pred, target, "huber");
    Tensor const& p = pred.value();
    Tensor const& y = target.value();
    if (p.rows() != y.rows() || p.cols() != y.cols()) shape_error("huber", p, y);
    if (!(delta > 0.0)) throw ConfigError("huber: delta must be positive");
    auto const count = static_cast<double>(p.size());
    Eigen::ArrayXXd r = (p - y).array();
    Eigen::ArrayXXd a = r.abs();
    double total = (a <= delta).select(0.5 * r.square(), delta * (a - 0.5 * delta)).sum();
    Tensor out(1, 1);
    out(0, 0) = count > 0 ? total / count : 0.0;
    return t.record(OpKind::huber, {pred, target}, std::move(out),
                    [pred, target, delta, count](Tensor const& g, std::span<Tensor* const> grads) {
                        if (count == 0) return;
                        Tensor d = (pred.value() - target.value()).cwiseMax(-delta).cwiseMin(delta) * (g(0, 0) / count);
                        if (grads[0]) *grads[0] += d;
                        if (grads[1]) *grads[1] -= d;
                    });
}

Var sum_squares(Var x) {
    Tape& t = tape_of(x, "sum_squares");
    Tensor out(1, 1);
    out(0, 0) = x.value().squaredNorm();
    return t.record(OpKind::sum_squares, {x}, std::move(out), [x](Tensor const& g, std::span<Tensor* const> grads) {
        if (grads[0]) *grads[0] += (2.0 * g(0, 0)) * x.value();
    });
}

}  // namespace psse::ad
