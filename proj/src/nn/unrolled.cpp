#include "psse/nn/unrolled.hpp"

#include <cmath>
#include <random>

#include "psse/error.hpp"
#include "psse/solvers.hpp"

namespace psse::nn {

namespace {

std::vector<int> prior_widths(UnrolledConfig const& cfg, Eigen::Index state_dim) {
    std::vector<int> w{static_cast<int>(state_dim)};
    w.insert(w.end(), cfg.fnn_hidden.begin(), cfg.fnn_hidden.end());
    w.push_back(static_cast<int>(state_dim));
    return w;
}

std::vector<Tensor> zero_prior(UnrolledConfig const& cfg, Eigen::Index state_dim) {
    if (cfg.prior == PriorKind::gnn) return flatten(zero_gnn_params(cfg.gnn));
    return flatten(zero_mlp(prior_widths(cfg, state_dim)));
}

std::vector<Tensor> random_prior(UnrolledConfig const& cfg, Eigen::Index state_dim, std::mt19937_64& rng) {
    if (cfg.prior == PriorKind::gnn) return flatten(random_gnn_params(cfg.gnn, rng));
    return flatten(random_mlp(prior_widths(cfg, state_dim), rng));
}

void fill_uniform(Tensor& t, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
}

}  // namespace

void UnrolledConfig::validate() const {
    if (iterations < 0) throw ConfigError("unrolled: iterations must be non-negative");
    if (prior == PriorKind::gnn) gnn.validate();
    for (int w : fnn_hidden)
        if (w < 1) throw ConfigError("unrolled: prior hidden widths must be positive");
}

nlohmann::json UnrolledConfig::to_json() const {
    return {{"iterations", iterations}, {"prior", to_string(prior)}, {"gnn", gnn.to_json()},
            {"fnn_hidden", fnn_hidden}, {"tied", tied}};
}

UnrolledConfig UnrolledConfig::from_json(nlohmann::json const& j) {
    UnrolledConfig cfg;
    try {
        if (j.contains("iterations")) cfg.iterations = j.at("iterations").get<int>();
        if (j.contains("prior")) cfg.prior = parse_prior_kind(j.at("prior").get<std::string>());
        if (j.contains("gnn")) cfg.gnn = GnnConfig::from_json(j.at("gnn"));
        if (j.contains("fnn_hidden")) cfg.fnn_hidden = j.at("fnn_hidden").get<std::vector<int>>();
        if (j.contains("tied")) cfg.tied = j.at("tied").get<bool>();
    } catch (nlohmann::json::exception const& e) {
        throw ConfigError(std::string("unrolled config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

UnrolledModel::UnrolledModel(UnrolledConfig cfg, ShiftOperator shift, Eigen::Index measurement_dim)
    : cfg_(std::move(cfg)), shift_(std::move(shift)), measurements_(measurement_dim) {
    cfg_.validate();
    if (shift_.size() < 1) throw ShapeError("unrolled: empty shift operator");
    if (measurements_ < 1) throw ShapeError("unrolled: measurement dimension must be positive");
    Eigen::Index const n2 = state_dim();
    blocks_.resize(static_cast<std::size_t>(cfg_.blocks()));
    for (int i = 0; i < cfg_.blocks(); ++i) {
        auto& b = blocks_[i];
        b.gain = Tensor::Zero(n2, measurements_);
        b.prior_gain = Tensor::Zero(n2, n2);
        b.offset = Tensor::Zero(1, n2);
        if (owns_prior(i)) b.prior = zero_prior(cfg_, n2);
    }
}

std::vector<Tensor*> UnrolledModel::parameters() {
    std::vector<Tensor*> out;
    for (int i = 0; i < cfg_.blocks(); ++i) {
        auto& b = blocks_[i];
        out.push_back(&b.gain);
        out.push_back(&b.prior_gain);
        out.push_back(&b.offset);
        for (auto& t : b.prior) out.push_back(&t);
    }
    return out;
}

std::vector<Tensor const*> UnrolledModel::parameters() const {
    std::vector<Tensor const*> out;
    for (auto const& b : blocks_) {
        out.push_back(&b.gain);
        out.push_back(&b.prior_gain);
        out.push_back(&b.offset);
        for (auto const& t : b.prior) out.push_back(&t);
    }
    return out;
}

std::vector<std::string> UnrolledModel::parameter_names() const {
    std::vector<std::string> out;
    for (int i = 0; i < cfg_.blocks(); ++i) {
        std::string const p = "block" + std::to_string(i) + ".";
        out.push_back(p + "gain");
        out.push_back(p + "prior_gain");
        out.push_back(p + "offset");
        if (!owns_prior(i)) continue;
        if (cfg_.prior == PriorKind::gnn) {
            for (int l = 0; l < cfg_.gnn.layers(); ++l)
                for (int k = 0; k < cfg_.gnn.hops[l]; ++k)
                    out.push_back(p + "gnn.layer" + std::to_string(l) + ".hop" + std::to_string(k));
        } else {
            for (std::size_t l = 0; l + 1 < cfg_.fnn_hidden.size() + 2; ++l) {
                out.push_back(p + "mlp.layer" + std::to_string(l) + ".weight");
                out.push_back(p + "mlp.layer" + std::to_string(l) + ".bias");
            }
        }
    }
    return out;
}

ad::Var UnrolledModel::forward(ad::Tape& tape, ad::Var z, std::span<ad::Var const> params) const {
    return forward_impl(tape, z, params, nullptr);
}

ad::Var UnrolledModel::forward_impl(ad::Tape& tape, ad::Var z, std::span<ad::Var const> params,
                                    UnrolledTrace* trace) const {
    if (z.cols() != measurements_)
        throw ShapeError("unrolled: input has " + std::to_string(z.cols()) + " measurements, model expects " +
                         std::to_string(measurements_));
    std::size_t expected = 0;
    for (auto const& b : blocks_) expected += 3 + b.prior.size();
    if (params.size() != expected)
        throw ShapeError("unrolled: " + std::to_string(params.size()) + " parameter handles, expected " +
                         std::to_string(expected));

    Eigen::Index const batch = z.rows();
    Eigen::Index const n = shift_.size();
    ad::Var v = tape.constant(Tensor::Zero(batch, 2 * n));
    if (trace) trace->states.push_back(v.value().row(0).transpose());

    std::size_t at = 0;
    std::span<ad::Var const> prior;
    for (int i = 0; i < cfg_.blocks(); ++i) {
        ad::Var gain = params[at];
        ad::Var prior_gain = params[at + 1];
        ad::Var offset = params[at + 2];
        at += 3;
        if (owns_prior(i)) {
            prior = params.subspan(at, blocks_[i].prior.size());
            at += blocks_[i].prior.size();
        }

        ad::Var u;
        if (cfg_.prior == PriorKind::gnn)
            u = ad::reshape(gnn_forward(ad::reshape(v, batch * n, 2), shift_.sparse, prior, cfg_.gnn), batch, 2 * n);
        else
            u = mlp_forward(v, prior);

        v = ad::add_bias(ad::add(ad::linear(z, gain), ad::linear(u, prior_gain)), offset);
        if (trace) {
            trace->priors.push_back(u.value().row(0).transpose());
            trace->states.push_back(v.value().row(0).transpose());
        }
    }
    return v;
}

UnrolledTrace UnrolledModel::trace(Eigen::VectorXd const& z) const {
    ad::Tape tape;
    auto params = bind(tape, false);
    Tensor row = z.transpose();
    UnrolledTrace t;
    forward_impl(tape, tape.constant(row), params, &t);
    return t;
}

StateVector UnrolledModel::apply_prior(int block, StateVector const& v) const {
    if (block < 0 || block >= cfg_.blocks()) throw ShapeError("unrolled: block index out of range");
    if (v.size() != state_dim()) throw ShapeError("unrolled: prior input has the wrong length");
    auto const& owner = blocks_[owns_prior(block) ? block : 0];
    ad::Tape tape;
    std::vector<ad::Var> prior;
    for (auto const& t : owner.prior) prior.push_back(tape.constant(t));
    Tensor row = v.transpose();
    ad::Var x = tape.constant(row);
    ad::Var u;
    Eigen::Index const n = shift_.size();
    if (cfg_.prior == PriorKind::gnn)
        u = ad::reshape(gnn_forward(ad::reshape(x, n, 2), shift_.sparse, prior, cfg_.gnn), 1, 2 * n);
    else
        u = mlp_forward(x, prior);
    return u.value().row(0).transpose();
}

nlohmann::json UnrolledModel::architecture() const {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < shift_.dense.rows(); ++r) {
        std::vector<double> row(shift_.dense.cols());
        for (Eigen::Index c = 0; c < shift_.dense.cols(); ++c) row[c] = shift_.dense(r, c);
        rows.push_back(row);
    }
    return {{"kind", "unrolled"},
            {"config", cfg_.to_json()},
            {"measurement_dim", measurements_},
            {"buses", shift_.size()},
            {"shift", {{"kind", to_string(shift_.kind)}, {"weighting", to_string(shift_.weighting)}, {"matrix", rows}}}};
}

UnrolledModel UnrolledModel::from_architecture(nlohmann::json const& arch) {
    try {
        auto cfg = UnrolledConfig::from_json(arch.at("config"));
        auto const n = arch.at("buses").get<Eigen::Index>();
        auto const& s = arch.at("shift");
        auto const& rows = s.at("matrix");
        if (static_cast<Eigen::Index>(rows.size()) != n) throw FormatError("unrolled architecture: shift matrix has the wrong size");
        Eigen::MatrixXd w(n, n);
        for (Eigen::Index r = 0; r < n; ++r) {
            auto row = rows.at(r).get<std::vector<double>>();
            if (static_cast<Eigen::Index>(row.size()) != n)
                throw FormatError("unrolled architecture: shift matrix row " + std::to_string(r) + " has the wrong size");
            for (Eigen::Index c = 0; c < n; ++c) w(r, c) = row[c];
        }
        auto shift = ShiftOperator::from_dense(std::move(w), parse_shift_kind(s.at("kind").get<std::string>()),
                                               parse_edge_weighting(s.at("weighting").get<std::string>()));
        return UnrolledModel(std::move(cfg), std::move(shift), arch.at("measurement_dim").get<Eigen::Index>());
    } catch (nlohmann::json::exception const& e) {
        throw FormatError(std::string("unrolled architecture: ") + e.what());
    }
}

UnrolledModel init_unrolled(UnrolledConfig const& cfg, ShiftOperator const& shift, MeasurementModel const& mm,
                            double lambda, InitStrategy strategy, std::uint64_t seed) {
    if (mm.bus_count() != shift.size())
        throw ShapeError("init_unrolled: measurement model has " + std::to_string(mm.bus_count()) +
                         " buses, shift operator " + std::to_string(shift.size()));
    UnrolledModel model(cfg, shift, static_cast<Eigen::Index>(mm.size()));
    std::mt19937_64 rng(seed);
    Eigen::Index const n2 = model.state_dim();

    if (strategy == InitStrategy::warm) {
        if (!(lambda > 0.0))
            throw IllPosedError("init_unrolled: warm start needs λ > 0 (the phase direction makes JᵀJ singular)");
        auto step = linearized_step(mm, flat_start(shift.size()), lambda);
        for (int i = 0; i < cfg.blocks(); ++i) {
            auto& b = model.blocks()[i];
            b.gain = step.gain;
            b.prior_gain = step.prior_gain;
            b.offset = step.offset.transpose();
        }
    } else {
        for (int i = 0; i < cfg.blocks(); ++i) {
            auto& b = model.blocks()[i];
            fill_uniform(b.gain, 1.0 / std::sqrt(static_cast<double>(mm.size())), rng);
            fill_uniform(b.prior_gain, 1.0 / std::sqrt(static_cast<double>(n2)), rng);
            fill_uniform(b.offset, 1.0 / std::sqrt(static_cast<double>(n2)), rng);
        }
    }
    for (int i = 0; i < cfg.blocks(); ++i) {
        auto& b = model.blocks()[i];
        if (!b.prior.empty()) b.prior = random_prior(cfg, n2, rng);
    }
    return model;
}

std::string to_string(PriorKind kind) { return kind == PriorKind::gnn ? "gnn" : "fnn"; }
std::string to_string(InitStrategy strategy) { return strategy == InitStrategy::warm ? "warm" : "random"; }

PriorKind parse_prior_kind(std::string const& name) {
    if (name == "gnn") return PriorKind::gnn;
    if (name == "fnn") return PriorKind::fnn;
    throw ConfigError("unknown prior '" + name + "' (expected gnn or fnn)");
}

InitStrategy parse_init_strategy(std::string const& name) {
    if (name == "warm") return InitStrategy::warm;
    if (name == "random") return InitStrategy::random;
    throw ConfigError("unknown init strategy '" + name + "' (expected warm or random)");
}

}  // namespace psse::nn
