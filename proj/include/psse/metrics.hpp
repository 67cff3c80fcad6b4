#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "psse/measurement.hpp"

namespace psse {

/// Accuracy of a batch of state estimates against ground truth, after
/// removing each estimate's global phase rotation.
struct MetricsReport {
    std::string method;
    std::size_t samples = 0;
    Eigen::VectorXd vm_rmse;   // per bus, p.u.
    Eigen::VectorXd va_rmse;   // per bus, rad
    double vm_rmse_all = 0.0;
    double va_rmse_all = 0.0;
    double state_rmse = 0.0;   // complex voltage error per bus
    double huber = 0.0;        // training loss: mean over samples and state entries, unaligned
    double residual_norm = 0.0;       // mean ‖z − h(v̂)‖; NaN when no model is given
    double runtime_per_sample = 0.0;  // seconds
    double mean_phase_offset = 0.0;   // mean rotation of the estimates relative to the truth, rad

    nlohmann::json to_json() const;
    /// Rows `scope,bus,vm_rmse,va_rmse`: one per bus, then `all` with bus 0.
    void write_csv(std::ostream& out) const;
};

/// Rows of `estimates`, `truth` and `z` belong to the same sample.
/// `mm` may be null, in which case the residual norm is NaN.
MetricsReport compute_metrics(std::string method, Eigen::MatrixXd const& estimates, Eigen::MatrixXd const& truth,
                              Eigen::MatrixXd const& z, MeasurementModel const* mm, double seconds,
                              double huber_delta = 1.0);

/// Estimates rotated onto the truth, one row per sample.
Eigen::MatrixXd align_rows(Eigen::MatrixXd const& estimates, Eigen::MatrixXd const& truth);

struct PlotSeries {
    std::string method;
    Eigen::MatrixXd states;  // one row per slot; aligned to the truth before writing
};

/// Tidy CSV `slot,bus,quantity,method,value` with quantity vm or va; the
/// truth is written as method `truth`. Slots count from 0, buses from 1.
void write_plot_csv(std::ostream& out, Eigen::MatrixXd const& truth, std::vector<PlotSeries> const& series);

/// Wrap to (−π, π].
double wrap_angle(double a);

}  // namespace psse
