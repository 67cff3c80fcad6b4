#include "psse/robust.hpp"

#include <chrono>
#include <cmath>

#include "psse/error.hpp"

namespace psse {

void RobustConfig::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("robust: gamma must be positive");
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw ConfigError("robust: rho must be non-negative");
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("robust: eta must be non-negative");
    if (steps < 1) throw ConfigError("robust: at least one ascent step is required");
    if (!(huber_delta > 0.0)) throw ConfigError("robust: huber delta must be positive");
}

nlohmann::json RobustConfig::to_json() const {
    return {{"gamma", gamma}, {"rho", rho},           {"eta", eta},
            {"steps", steps}, {"normalize", normalize}, {"huber_delta", huber_delta}};
}

RobustConfig RobustConfig::from_json(nlohmann::json const& j) {
    RobustConfig rc;
    try {
        if (j.contains("gamma")) rc.gamma = j.at("gamma").get<double>();
        if (j.contains("rho")) rc.rho = j.at("rho").get<double>();
        if (j.contains("eta")) rc.eta = j.at("eta").get<double>();
        if (j.contains("steps")) rc.steps = j.at("steps").get<int>();
        if (j.contains("normalize")) rc.normalize = j.at("normalize").get<bool>();
        if (j.contains("huber_delta")) rc.huber_delta = j.at("huber_delta").get<double>();
    } catch (nlohmann::json::exception const& e) {
        throw ConfigError(std::string("robust config: ") + e.what());
    }
    rc.validate();
    return rc;
}

double psi_from(double loss, double cost, RobustConfig const& rc) { return loss + rc.gamma * (rc.rho - cost); }

PsiValue psi(nn::Estimator const& model, Eigen::VectorXd const& zeta, Eigen::VectorXd const& z,
             StateVector const& v_star, RobustConfig const& rc) {
    if (zeta.size() != z.size()) throw ShapeError("psi: perturbed and clean inputs differ in length");
    Eigen::MatrixXd pred = model.predict(zeta).transpose();
    Eigen::MatrixXd truth = v_star.transpose();
    PsiValue out;
    out.loss = nn::row_huber(pred, truth, rc.huber_delta)[0];
    out.cost = (z - zeta).squaredNorm();
    out.value = psi_from(out.loss, out.cost, rc);
    if (!std::isfinite(out.value)) throw NumericalError("psi: non-finite value");
    return out;
}

nn::Tensor psi_gradient(nn::Estimator const& model, nn::Tensor const& zeta, nn::Tensor const& z,
                        nn::Tensor const& v_star, RobustConfig const& rc) {
    if (zeta.rows() != z.rows() || zeta.cols() != z.cols()) throw ShapeError("psi_gradient: input shapes differ");
    ad::Tape tape;
    auto params = model.bind(tape, false);
    ad::Var x = tape.leaf(zeta);
    ad::Var loss = ad::huber(model.forward(tape, x, params), tape.constant(v_star), rc.huber_delta);
    tape.backward(loss);
    // The tape loss averages over rows; each row's own loss has B times that gradient.
    return static_cast<double>(zeta.rows()) * x.grad() - 2.0 * rc.gamma * (zeta - z);
}

nn::Tensor adversarial_perturb(nn::Estimator const& model, nn::Tensor const& z, nn::Tensor const& v_star,
                               RobustConfig const& rc, std::span<std::size_t const> ids) {
    rc.validate();
    nn::Tensor zeta = z;
    if (rc.eta == 0.0) return zeta;
    for (int step = 0; step < rc.steps; ++step) {
        nn::Tensor g = psi_gradient(model, zeta, z, v_star, rc);
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
            if (!g.row(r).allFinite()) {
                auto id = ids.empty() ? static_cast<std::size_t>(r) : ids[r];
                throw NumericalError("adversarial_perturb: non-finite gradient at sample " + std::to_string(id));
            }
            if (rc.normalize) {
                double const norm = g.row(r).norm();
                if (norm > 0.0) g.row(r) /= norm;
            }
        }
        zeta += rc.eta * g;
    }
    return zeta;
}

Eigen::VectorXd adversarial_perturb(nn::Estimator const& model, Eigen::VectorXd const& z, StateVector const& v_star,
                                    RobustConfig const& rc) {
    nn::Tensor zr = z.transpose();
    nn::Tensor vr = v_star.transpose();
    return adversarial_perturb(model, zr, vr, rc).row(0).transpose();
}

nn::TrainHistory robust_train(nn::Estimator& model, Dataset const& data, RobustConfig const& rc,
                              nn::TrainOptions const& opts) {
    rc.validate();
    auto perturb = [&rc](nn::Estimator const& m, nn::Tensor const& z, nn::Tensor const& v,
                         std::span<std::size_t const> ids) { return adversarial_perturb(m, z, v, rc, ids); };
    return nn::train(model, data, opts, perturb);
}

MetricsReport evaluate_on(nn::Estimator const& model, std::string method, Eigen::MatrixXd const& z,
                          Eigen::MatrixXd const& truth, MeasurementModel const* mm, double huber_delta) {
    auto const t0 = std::chrono::steady_clock::now();
    Eigen::MatrixXd est = model.predict(z);
    double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return compute_metrics(std::move(method), est, truth, z, mm, secs, huber_delta);
}

AttackReport attack_eval(nn::Estimator const& model, Dataset const& data, RobustConfig const& rc,
                         MeasurementModel const* mm) {
    rc.validate();
    AttackReport r;
    r.samples = data.indices(Split::test);
    if (r.samples.empty()) throw UsageError("attack_eval: the dataset has no test samples");
    Eigen::MatrixXd z = data.measurement_rows(r.samples);
    Eigen::MatrixXd v = data.state_rows(r.samples);
    r.z_attacked = adversarial_perturb(model, nn::Tensor(z), nn::Tensor(v), rc, r.samples);

    r.clean = evaluate_on(model, model.kind(), z, v, mm, rc.huber_delta);
    r.attacked = evaluate_on(model, model.kind(), r.z_attacked, v, mm, rc.huber_delta);
    r.clean_estimates = model.predict(z);
    r.attacked_estimates = model.predict(r.z_attacked);

    auto const losses = nn::row_huber(r.attacked_estimates, v, rc.huber_delta);
    double cost = 0.0;
    for (Eigen::Index s = 0; s < z.rows(); ++s) cost += (z.row(s) - r.z_attacked.row(s)).squaredNorm();
    double const n = static_cast<double>(z.rows());
    r.mean_cost = cost / n;
    r.mean_psi = psi_from(losses.mean(), r.mean_cost, rc);
    return r;
}

}  // namespace psse
