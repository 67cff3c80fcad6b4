#include "psse/nn/gnn.hpp"

#include <cmath>
#include <string>

#include "psse/error.hpp"

namespace psse::nn {

namespace {

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "linear"; }

Activation parse_activation(std::string const& name) {
    if (name == "relu") return Activation::relu;
    if (name == "linear") return Activation::linear;
    throw ConfigError("unknown activation '" + name + "' (expected relu or linear)");
}

Tensor apply(Activation a, Tensor x) {
    if (a == Activation::relu) x = x.cwiseMax(0.0);
    return x;
}

}  // namespace

std::size_t GnnConfig::parameter_count() const {
    std::size_t n = 0;
    for (int l = 0; l < layers(); ++l)
        n += static_cast<std::size_t>(hops[l]) * static_cast<std::size_t>(widths[l]) *
             static_cast<std::size_t>(widths[l + 1]);
    return n;
}

void GnnConfig::validate() const {
    if (hops.empty()) throw ConfigError("gnn: at least one layer is required");
    if (widths.size() != hops.size() + 1)
        throw ConfigError("gnn: " + std::to_string(hops.size()) + " layers need " + std::to_string(hops.size() + 1) +
                          " widths, got " + std::to_string(widths.size()));
    if (activations.size() != hops.size())
        throw ConfigError("gnn: " + std::to_string(hops.size()) + " layers need as many activations, got " +
                          std::to_string(activations.size()));
    if (widths.front() != 2 || widths.back() != 2)
        throw ConfigError("gnn: input and output widths must be 2 (real and imaginary parts)");
    for (int w : widths)
        if (w < 1) throw ConfigError("gnn: feature widths must be positive");
    for (int k : hops)
        if (k < 1) throw ConfigError("gnn: hop counts must be at least 1");
}

GnnConfig GnnConfig::uniform(int layers, int hops, int hidden) {
    if (layers < 1) throw ConfigError("gnn: at least one layer is required");
    GnnConfig cfg;
    cfg.widths.assign(static_cast<std::size_t>(layers) + 1, hidden);
    cfg.widths.front() = 2;
    cfg.widths.back() = 2;
    cfg.hops.assign(static_cast<std::size_t>(layers), hops);
    cfg.activations.assign(static_cast<std::size_t>(layers), Activation::relu);
    cfg.activations.back() = Activation::linear;
    cfg.validate();
    return cfg;
}

nlohmann::json GnnConfig::to_json() const {
    nlohmann::json acts = nlohmann::json::array();
    for (auto a : activations) acts.push_back(to_string(a));
    return {{"widths", widths}, {"hops", hops}, {"activations", acts}};
}

GnnConfig GnnConfig::from_json(nlohmann::json const& j) {
    GnnConfig cfg;
    try {
        if (j.contains("widths")) cfg.widths = j.at("widths").get<std::vector<int>>();
        if (j.contains("hops")) cfg.hops = j.at("hops").get<std::vector<int>>();
        if (j.contains("activations")) {
            cfg.activations.clear();
            for (auto const& a : j.at("activations")) cfg.activations.push_back(parse_activation(a.get<std::string>()));
        } else {
            cfg.activations.assign(cfg.hops.size(), Activation::relu);
            if (!cfg.activations.empty()) cfg.activations.back() = Activation::linear;
        }
    } catch (nlohmann::json::exception const& e) {
        throw ConfigError(std::string("gnn config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

GnnParams zero_gnn_params(GnnConfig const& cfg) {
    cfg.validate();
    GnnParams p(static_cast<std::size_t>(cfg.layers()));
    for (int l = 0; l < cfg.layers(); ++l)
        p[l].assign(static_cast<std::size_t>(cfg.hops[l]), Tensor::Zero(cfg.widths[l], cfg.widths[l + 1]));
    return p;
}

GnnParams random_gnn_params(GnnConfig const& cfg, std::mt19937_64& rng) {
    GnnParams p = zero_gnn_params(cfg);
    for (int l = 0; l < cfg.layers(); ++l) {
        double const bound = 1.0 / std::sqrt(static_cast<double>(cfg.widths[l]) * cfg.hops[l]);
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (auto& h : p[l])
            for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = dist(rng);
    }
    return p;
}

std::vector<Tensor> flatten(GnnParams const& params) {
    std::vector<Tensor> out;
    for (auto const& layer : params)
        for (auto const& h : layer) out.push_back(h);
    return out;
}

Tensor graph_conv(Tensor const& x, ShiftOperator const& w, std::span<Tensor const> filters) {
    if (filters.empty()) throw ShapeError("graph_conv: no filter taps");
    if (x.rows() != w.size())
        throw ShapeError("graph_conv: " + std::to_string(x.rows()) + " feature rows for a " +
                         std::to_string(w.size()) + "-node shift operator");
    for (auto const& h : filters)
        if (h.rows() != x.cols() || h.cols() != filters.front().cols())
            throw ShapeError("graph_conv: filter tap is " + std::to_string(h.rows()) + "x" + std::to_string(h.cols()) +
                             " for " + std::to_string(x.cols()) + " input features");
    Tensor s = x;
    Tensor y = s * filters[0];
    for (std::size_t k = 1; k < filters.size(); ++k) {
        Tensor next = w.sparse * s;
        s = std::move(next);
        y += s * filters[k];
    }
    return y;
}

Tensor gnn_forward(Tensor const& x0, ShiftOperator const& w, GnnParams const& params, GnnConfig const& cfg) {
    cfg.validate();
    if (params.size() != static_cast<std::size_t>(cfg.layers()))
        throw ShapeError("gnn_forward: parameters for " + std::to_string(params.size()) + " layers, config has " +
                         std::to_string(cfg.layers()));
    Tensor x = x0;
    for (int l = 0; l < cfg.layers(); ++l) {
        if (params[l].size() != static_cast<std::size_t>(cfg.hops[l]))
            throw ShapeError("gnn_forward: layer " + std::to_string(l) + " has " + std::to_string(params[l].size()) +
                             " taps, expected " + std::to_string(cfg.hops[l]));
        x = apply(cfg.activations[l], graph_conv(x, w, params[l]));
    }
    return x;
}

ad::Var graph_conv(ad::Var x, ad::SparseRowMajor const& w, std::span<ad::Var const> filters) {
    if (filters.empty()) throw ShapeError("graph_conv: no filter taps");
    ad::Var s = x;
    ad::Var y = ad::matmul(s, filters[0]);
    for (std::size_t k = 1; k < filters.size(); ++k) {
        s = ad::shift_blocks(s, w);
        y = ad::add(y, ad::matmul(s, filters[k]));
    }
    return y;
}

ad::Var gnn_forward(ad::Var x0, ad::SparseRowMajor const& w, std::span<ad::Var const> filters, GnnConfig const& cfg) {
    std::size_t taps = 0;
    for (int k : cfg.hops) taps += static_cast<std::size_t>(k);
    if (filters.size() != taps)
        throw ShapeError("gnn_forward: " + std::to_string(filters.size()) + " filter taps, config needs " +
                         std::to_string(taps));
    ad::Var x = x0;
    std::size_t at = 0;
    for (int l = 0; l < cfg.layers(); ++l) {
        auto const k = static_cast<std::size_t>(cfg.hops[l]);
        x = graph_conv(x, w, filters.subspan(at, k));
        at += k;
        if (cfg.activations[l] == Activation::relu) x = ad::relu(x);
    }
    return x;
}

}  // namespace psse::nn
