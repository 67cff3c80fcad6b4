#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "psse/dataset.hpp"
#include "psse/metrics.hpp"
#include "psse/nn/estimator.hpp"
#include "psse/nn/train.hpp"

namespace psse {

struct RobustConfig {
    double gamma = 0.13;     // weight of the transport cost
    double rho = 0.0;        // ball radius; shifts ψ by γρ and nothing else
    double eta = 0.02;       // ascent step
    int steps = 1;           // ascent steps; more than one goes beyond the single-step attack
    bool normalize = false;  // scale each sample's ascent direction to unit norm
    double huber_delta = 1.0;

    void validate() const;
    nlohmann::json to_json() const;
    static RobustConfig from_json(nlohmann::json const& j);
};

/// Parts of ψ(ζ) = ℓ(π(ζ), v*) + γ(ρ − ‖z − ζ‖²) for one sample.
struct PsiValue {
    double loss = 0.0;
    double cost = 0.0;
    double value = 0.0;
};

/// ℓ + γ(ρ − c).
double psi_from(double loss, double cost, RobustConfig const& rc);

PsiValue psi(nn::Estimator const& model, Eigen::VectorXd const& zeta, Eigen::VectorXd const& z,
             StateVector const& v_star, RobustConfig const& rc);

/// ∇_ζ ψ for each row (ρ does not enter).
nn::Tensor psi_gradient(nn::Estimator const& model, nn::Tensor const& zeta, nn::Tensor const& z,
                        nn::Tensor const& v_star, RobustConfig const& rc);

/// Gradient ascent on ψ from ζ = z, row by row. `ids` (optional) label rows in
/// diagnostics. Throws NumericalError naming the sample on a non-finite gradient.
nn::Tensor adversarial_perturb(nn::Estimator const& model, nn::Tensor const& z, nn::Tensor const& v_star,
                               RobustConfig const& rc, std::span<std::size_t const> ids = {});
Eigen::VectorXd adversarial_perturb(nn::Estimator const& model, Eigen::VectorXd const& z, StateVector const& v_star,
                                    RobustConfig const& rc);

/// Training on perturbed inputs; the perturbation is a constant for the weight update.
nn::TrainHistory robust_train(nn::Estimator& model, Dataset const& data, RobustConfig const& rc,
                              nn::TrainOptions const& opts);

struct AttackReport {
    MetricsReport clean;
    MetricsReport attacked;
    double mean_psi = 0.0;
    double mean_cost = 0.0;            // mean ‖z − ζ‖²
    std::vector<std::size_t> samples;  // dataset indices of the test rows
    Eigen::MatrixXd z_attacked;        // one row per test sample
    Eigen::MatrixXd clean_estimates;
    Eigen::MatrixXd attacked_estimates;
};

/// Perturb every test input against `model` and compare metrics.
/// `mm` (optional) enables residual norms.
AttackReport attack_eval(nn::Estimator const& model, Dataset const& data, RobustConfig const& rc,
                         MeasurementModel const* mm = nullptr);

/// Metrics of `model` on given (already attacked) test inputs.
MetricsReport evaluate_on(nn::Estimator const& model, std::string method, Eigen::MatrixXd const& z,
                          Eigen::MatrixXd const& truth, MeasurementModel const* mm, double huber_delta);

}  // namespace psse
