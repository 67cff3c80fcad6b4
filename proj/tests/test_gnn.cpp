#include <doctest.h>

#include <random>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "psse/error.hpp"
#include "psse/nn/gnn.hpp"

using namespace psse;
using namespace psse::nn;
using gradcheck::random_tensor;

using oracles::hop_distance;
using oracles::random_graph;
GnnConfig random_config(std::mt19937_64& rng) { return oracles::random_gnn_config(rng); }

TEST_CASE("zero shift keeps only the first tap") {
    std::mt19937_64 rng(1);
    auto w = ShiftOperator::from_dense(Eigen::MatrixXd::Zero(4, 4));
    Tensor x = random_tensor(4, 3, rng);
    std::vector<Tensor> h{random_tensor(3, 2, rng), random_tensor(3, 2, rng), random_tensor(3, 2, rng)};
    CHECK((graph_conv(x, w, h) - x * h[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single identity tap is the identity") {
    std::mt19937_64 rng(2);
    auto w = random_graph(5, 0.5, rng);
    Tensor x = random_tensor(5, 3, rng);
    std::vector<Tensor> h{Tensor::Identity(3, 3)};
    CHECK(graph_conv(x, w, h) == x);
}

TEST_CASE("graph convolution equals the explicit matrix-power sum") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        auto w = random_graph(5, 0.5, rng);
        Tensor x = random_tensor(5, 3, rng);
        std::vector<Tensor> h{random_tensor(3, 4, rng), random_tensor(3, 4, rng), random_tensor(3, 4, rng)};
        Eigen::MatrixXd oracle = oracles::graph_conv(w.dense, x, h);
        CHECK((Eigen::MatrixXd(graph_conv(x, w, h)) - oracle).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("graph convolution checks shapes") {
    std::mt19937_64 rng(4);
    auto w = random_graph(5, 0.5, rng);
    std::vector<Tensor> h{Tensor::Ones(3, 2)};
    CHECK_THROWS_AS(graph_conv(Tensor::Ones(4, 3), w, h), ShapeError);
    CHECK_THROWS_AS(graph_conv(Tensor::Ones(5, 2), w, h), ShapeError);
    CHECK_THROWS_AS(graph_conv(Tensor::Ones(5, 3), w, std::vector<Tensor>{}), ShapeError);
}

TEST_CASE("all-zero weights give zero output") {
    std::mt19937_64 rng(5);
    auto w = random_graph(6, 0.5, rng);
    GnnConfig cfg;
    CHECK(gnn_forward(random_tensor(6, 2, rng), w, zero_gnn_params(cfg), cfg).isZero());
}

TEST_CASE("one linear identity layer is the identity map") {
    std::mt19937_64 rng(6);
    auto w = random_graph(6, 0.5, rng);
    GnnConfig cfg;
    cfg.widths = {2, 2};
    cfg.hops = {1};
    cfg.activations = {Activation::linear};
    GnnParams p{{Tensor::Identity(2, 2)}};
    Tensor x = random_tensor(6, 2, rng);
    CHECK(gnn_forward(x, w, p, cfg) == x);
}

TEST_CASE("output of a node depends only on its receptive field") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        auto w = random_graph(12, 0.18, rng);
        auto dist = hop_distance(w.dense);
        GnnConfig cfg = random_config(rng);
        int reach = 0;
        for (int k : cfg.hops) reach += k - 1;
        auto params = random_gnn_params(cfg, rng);
        Tensor x = random_tensor(12, 2, rng);
        Tensor base = gnn_forward(x, w, params, cfg);
        for (Eigen::Index n = 0; n < 12; ++n) {
            Tensor xp = x;
            for (Eigen::Index m = 0; m < 12; ++m)
                if (dist(n, m) > reach) xp.row(m) = random_tensor(1, 2, rng);
            CHECK(gnn_forward(xp, w, params, cfg).row(n) == base.row(n));
        }
    }
}

TEST_CASE("parameter count follows the per-layer formula") {
    GnnConfig standard;
    CHECK(standard.parameter_count() == 64);
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        GnnConfig cfg = random_config(rng);
        std::size_t expected = 0;
        for (int l = 0; l < cfg.layers(); ++l)
            expected += static_cast<std::size_t>(cfg.hops[l] * cfg.widths[l] * cfg.widths[l + 1]);
        CHECK(cfg.parameter_count() == expected);
        std::size_t stored = 0;
        for (auto const& t : flatten(random_gnn_params(cfg, rng))) stored += static_cast<std::size_t>(t.size());
        CHECK(stored == expected);
    }
}

TEST_CASE("random taps respect the fan-in bound") {
    GnnConfig cfg = GnnConfig::uniform(3, 3, 6);
    std::mt19937_64 rng(9);
    auto p = random_gnn_params(cfg, rng);
    for (int l = 0; l < cfg.layers(); ++l) {
        double const bound = 1.0 / std::sqrt(static_cast<double>(cfg.widths[l] * cfg.hops[l]));
        for (auto const& h : p[l]) CHECK(h.cwiseAbs().maxCoeff() <= bound);
    }
}

TEST_CASE("invalid configs are rejected") {
    GnnConfig cfg;
    cfg.widths = {3, 8, 2};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.hops = {0, 2};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.activations = {Activation::relu};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK(GnnConfig::from_json(GnnConfig{}.to_json()).to_json() == GnnConfig{}.to_json());
}

TEST_CASE("tape forward matches the plain forward on stacked graphs") {
    std::mt19937_64 rng(10);
    auto w = random_graph(6, 0.4, rng);
    GnnConfig cfg = GnnConfig::uniform(3, 3, 5);
    auto params = random_gnn_params(cfg, rng);
    Tensor x0 = random_tensor(6, 2, rng), x1 = random_tensor(6, 2, rng);
    Tensor stacked(12, 2);
    stacked << x0, x1;
    ad::Tape tape;
    std::vector<ad::Var> taps;
    for (auto const& t : flatten(params)) taps.push_back(tape.constant(t));
    Tensor out = gnn_forward(tape.constant(stacked), w.sparse, taps, cfg).value();
    CHECK((out.topRows(6) - gnn_forward(x0, w, params, cfg)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((out.bottomRows(6) - gnn_forward(x1, w, params, cfg)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("graph convolution layer passes a gradient check") {
    std::mt19937_64 rng(11);
    auto w = random_graph(5, 0.5, rng);
    GnnConfig cfg = GnnConfig::uniform(2, 3, 4);
    std::vector<Tensor> inputs{random_tensor(10, 2, rng)};
    for (auto const& t : flatten(random_gnn_params(cfg, rng))) inputs.push_back(t);
    double err = gradcheck::relative_error(
        [&](ad::Tape&, std::vector<ad::Var> const& v) {
            std::vector<ad::Var> taps(v.begin() + 1, v.end());
            return ad::sum_squares(gnn_forward(v[0], w.sparse, taps, cfg));
        },
        inputs);
    CHECK(err <= 1e-4);
}
