#include <doctest.h>

#include <cmath>
#include <random>

#include "gradcheck.hpp"
#include "psse/autodiff/adam.hpp"
#include "psse/error.hpp"

using namespace psse;
using namespace psse::ad;
using gradcheck::random_tensor;
using gradcheck::relative_error;

TEST_CASE("derivative of x squared at 3 is 6") {
    Tape tape;
    Var x = tape.leaf(Tensor::Constant(1, 1, 3.0));
    Var y = sum_squares(x);
    tape.backward(y);
    CHECK(y.value()(0, 0) == 9.0);
    CHECK(x.grad()(0, 0) == 6.0);
}

TEST_CASE("fan-out accumulates gradients") {
    Tape tape;
    Var x = tape.leaf(Tensor::Constant(1, 1, 1.5));
    Var y = add(x, x);
    tape.backward(y);
    CHECK(x.grad()(0, 0) == 2.0);
}

TEST_CASE("constants receive no gradient and unreached leaves get zeros") {
    Tape tape;
    Var c = tape.constant(Tensor::Constant(2, 2, 1.0));
    Var x = tape.leaf(Tensor::Constant(2, 2, 2.0));
    Var unused = tape.leaf(Tensor::Constant(1, 3, 2.0));
    CHECK_FALSE(tape.requires_grad(c));
    CHECK(tape.requires_grad(add(c, x)));
    tape.backward(sum_squares(add(c, x)));
    CHECK(x.grad().isApprox(Tensor::Constant(2, 2, 6.0)));
    CHECK(unused.grad().isZero());
}

TEST_CASE("matmul gradients match finite differences") {
    std::mt19937_64 rng(1);
    double err = relative_error([](Tape&, std::vector<Var> const& v) { return sum_squares(matmul(v[0], v[1])); },
                                {random_tensor(4, 3, rng), random_tensor(3, 2, rng)});
    CHECK(err < 1e-6);
}

TEST_CASE("every op passes a gradient check") {
    std::mt19937_64 rng(2);
    auto check = [](double err) { CHECK(err < 1e-6); };
    check(relative_error([](Tape&, auto const& v) { return sum_squares(linear(v[0], v[1])); },
                         {random_tensor(3, 4, rng), random_tensor(2, 4, rng)}));
    check(relative_error([](Tape&, auto const& v) { return sum_squares(sub(v[0], v[1])); },
                         {random_tensor(3, 4, rng), random_tensor(3, 4, rng)}));
    check(relative_error([](Tape&, auto const& v) { return sum_squares(add_bias(v[0], v[1])); },
                         {random_tensor(3, 4, rng), random_tensor(1, 4, rng)}));
    check(relative_error([](Tape&, auto const& v) { return sum_squares(add_scalar(scale(v[0], -1.7), 0.3)); },
                         {random_tensor(3, 4, rng)}));
    check(relative_error([](Tape&, auto const& v) { return sum_squares(relu(v[0])); }, {random_tensor(5, 4, rng)}));
    check(relative_error([](Tape&, auto const& v) { return sum_squares(matmul(reshape(v[0], 6, 2), v[1])); },
                         {random_tensor(3, 4, rng), random_tensor(2, 3, rng)}));
    check(relative_error([](Tape&, auto const& v) { return sum_squares(gather_rows(v[0], {2, 0, 2})); },
                         {random_tensor(3, 4, rng)}));
    check(relative_error([](Tape&, auto const& v) { return huber(v[0], v[1], 1.0); },
                         {random_tensor(4, 3, rng, 2.0), random_tensor(4, 3, rng)}));
}

TEST_CASE("shift_blocks and quadratic_forms pass a gradient check") {
    std::mt19937_64 rng(3);
    Eigen::MatrixXd wd = Eigen::MatrixXd(random_tensor(4, 4, rng));
    SparseRowMajor w = wd.sparseView();
    double err = relative_error([&](Tape&, auto const& v) { return sum_squares(shift_blocks(v[0], w)); },
                                {random_tensor(8, 3, rng)});
    CHECK(err < 1e-6);

    std::vector<SparseColMajor> forms;
    for (int m = 0; m < 3; ++m) {
        Eigen::MatrixXd a = Eigen::MatrixXd(random_tensor(4, 4, rng));
        forms.push_back(Eigen::MatrixXd(a + a.transpose()).sparseView());
    }
    err = relative_error([&](Tape&, auto const& v) { return sum_squares(quadratic_forms(v[0], forms)); },
                         {random_tensor(2, 4, rng)});
    CHECK(err < 1e-6);
}

TEST_CASE("shift_blocks applies the operator to each block") {
    Eigen::MatrixXd wd(2, 2);
    wd << 0, 1, 1, 0;
    SparseRowMajor w = wd.sparseView();
    Tape tape;
    Tensor x(4, 1);
    x << 1, 2, 3, 4;
    Var y = shift_blocks(tape.constant(x), w);
    Tensor expected(4, 1);
    expected << 2, 1, 4, 3;
    CHECK(y.value() == expected);
}

TEST_CASE("huber is quadratic inside the threshold and linear outside") {
    Tape tape;
    Tensor p(1, 2), t(1, 2);
    p << 0.5, 3.0;
    t << 0.0, 0.0;
    Var l = huber(tape.constant(p), tape.constant(t), 1.0);
    CHECK(l.value()(0, 0) == doctest::Approx((0.125 + 2.5) / 2.0));
}

TEST_CASE("relu subgradient at zero is zero") {
    Tape tape;
    Var x = tape.leaf(Tensor::Zero(1, 3));
    tape.backward(sum_squares(add_scalar(relu(x), 1.0)));
    CHECK(x.grad().isZero());
}

TEST_CASE("backward rejects non-scalar targets and foreign nodes") {
    Tape tape, other;
    Var x = tape.leaf(Tensor::Ones(2, 2));
    CHECK_THROWS_AS(tape.backward(x), UsageError);
    Var y = other.leaf(Tensor::Ones(1, 1));
    CHECK_THROWS_AS(tape.backward(y), UsageError);
    CHECK_THROWS_AS(tape.backward(Var{}), UsageError);
}

TEST_CASE("shape mismatches are reported") {
    Tape tape;
    Var a = tape.leaf(Tensor::Ones(2, 3));
    Var b = tape.leaf(Tensor::Ones(2, 3));
    CHECK_THROWS_AS(matmul(a, b), ShapeError);
    CHECK_THROWS_AS(add(a, tape.leaf(Tensor::Ones(3, 2))), ShapeError);
    CHECK_THROWS_AS(reshape(a, 4, 2), ShapeError);
}

TEST_CASE("backward is deterministic") {
    std::mt19937_64 rng(4);
    Tensor a = random_tensor(5, 3, rng), b = random_tensor(3, 4, rng);
    auto run = [&] {
        Tape tape;
        Var x = tape.leaf(a);
        Var y = tape.leaf(b);
        tape.backward(huber(relu(matmul(x, y)), tape.constant(Tensor::Ones(5, 4))));
        return std::make_pair(Tensor(x.grad()), Tensor(y.grad()));
    };
    auto r1 = run();
    auto r2 = run();
    CHECK(r1.first == r2.first);
    CHECK(r1.second == r2.second);
}

TEST_CASE("first Adam step moves each parameter by about the learning rate") {
    Tensor p = Tensor::Zero(2, 3);
    std::vector<Tensor*> params{&p};
    AdamState st(params, {});
    std::vector<Tensor> grads{Tensor::Ones(2, 3)};
    adam_step(params, grads, st);
    CHECK((p.array() + 1e-3).abs().maxCoeff() < 1e-10);
}

TEST_CASE("zero gradient leaves Adam parameters unchanged") {
    Tensor p = Tensor::Constant(2, 2, 0.3);
    std::vector<Tensor*> params{&p};
    AdamState st(params, {});
    std::vector<Tensor> grads{Tensor::Zero(2, 2)};
    adam_step(params, grads, st);
    CHECK(p == Tensor::Constant(2, 2, 0.3));
}

TEST_CASE("Adam trajectories are reproducible") {
    std::mt19937_64 rng(7);
    std::vector<Tensor> stream;
    for (int i = 0; i < 10; ++i) stream.push_back(random_tensor(3, 3, rng));
    auto run = [&] {
        Tensor p = Tensor::Zero(3, 3);
        std::vector<Tensor*> params{&p};
        AdamState st(params, {});
        for (auto const& g : stream) adam_step(params, std::span<Tensor const>(&g, 1), st);
        return p;
    };
    CHECK(run() == run());
}

TEST_CASE("non-finite gradient aborts the Adam step") {
    Tensor p = Tensor::Zero(1, 2);
    std::vector<Tensor*> params{&p};
    AdamState st(params, {});
    Tensor g(1, 2);
    g << 1.0, std::nan("");
    CHECK_THROWS_AS(adam_step(params, std::span<Tensor const>(&g, 1), st), NumericalError);
    CHECK(p.isZero());
    CHECK(st.step == 0);
}
