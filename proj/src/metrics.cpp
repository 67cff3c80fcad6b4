#include "psse/metrics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "psse/dataset.hpp"
#include "psse/error.hpp"
#include "psse/state.hpp"

namespace psse {

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * std::numbers::pi);
    if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
}

Eigen::MatrixXd align_rows(Eigen::MatrixXd const& estimates, Eigen::MatrixXd const& truth) {
    if (estimates.rows() != truth.rows() || estimates.cols() != truth.cols())
        throw ShapeError("align_rows: estimate and truth shapes differ");
    Eigen::MatrixXd out(estimates.rows(), estimates.cols());
    for (Eigen::Index s = 0; s < estimates.rows(); ++s) {
        StateVector e = estimates.row(s).transpose();
        StateVector t = truth.row(s).transpose();
        out.row(s) = rotate(e, phase_alignment(e, t)).transpose();
    }
    return out;
}

MetricsReport compute_metrics(std::string method, Eigen::MatrixXd const& estimates, Eigen::MatrixXd const& truth,
                              Eigen::MatrixXd const& z, MeasurementModel const* mm, double seconds,
                              double huber_delta) {
    if (estimates.rows() != truth.rows() || estimates.cols() != truth.cols())
        throw ShapeError("compute_metrics: estimate and truth shapes differ");
    if (estimates.rows() == 0) throw UsageError("compute_metrics: no samples");
    if (estimates.cols() % 2 != 0) throw ShapeError("compute_metrics: state rows must have even length");
    if (mm && (z.rows() != estimates.rows() || z.cols() != static_cast<Eigen::Index>(mm->size())))
        throw ShapeError("compute_metrics: measurement rows do not match the model");

    Eigen::Index const s_count = estimates.rows();
    Eigen::Index const n = estimates.cols() / 2;
    MetricsReport r;
    r.method = std::move(method);
    r.samples = static_cast<std::size_t>(s_count);
    r.vm_rmse = Eigen::VectorXd::Zero(n);
    r.va_rmse = Eigen::VectorXd::Zero(n);

    double state_sq = 0.0;
    double huber_sum = 0.0;
    double residual_sum = 0.0;
    double offset_sum = 0.0;
    for (Eigen::Index s = 0; s < s_count; ++s) {
        StateVector e = estimates.row(s).transpose();
        StateVector t = truth.row(s).transpose();
        double const theta = phase_alignment(e, t);
        offset_sum += -theta;
        StateVector a = rotate(e, theta);
        Eigen::VectorXcd ac = to_complex(a);
        Eigen::VectorXcd tc = to_complex(t);
        for (Eigen::Index b = 0; b < n; ++b) {
            double const dm = std::abs(ac[b]) - std::abs(tc[b]);
            double const da = wrap_angle(std::arg(ac[b]) - std::arg(tc[b]));
            r.vm_rmse[b] += dm * dm;
            r.va_rmse[b] += da * da;
        }
        state_sq += (a - t).squaredNorm();
        Eigen::ArrayXd const d = (e - t).array().abs();
        huber_sum += (d <= huber_delta).select(0.5 * d.square(), huber_delta * (d - 0.5 * huber_delta)).mean();
        if (mm) residual_sum += (z.row(s).transpose() - mm->evaluate(e)).norm();
    }
    double const sd = static_cast<double>(s_count);
    r.vm_rmse_all = std::sqrt(r.vm_rmse.sum() / (sd * static_cast<double>(n)));
    r.va_rmse_all = std::sqrt(r.va_rmse.sum() / (sd * static_cast<double>(n)));
    r.vm_rmse = (r.vm_rmse / sd).cwiseSqrt();
    r.va_rmse = (r.va_rmse / sd).cwiseSqrt();
    r.state_rmse = std::sqrt(state_sq / (sd * static_cast<double>(n)));
    r.huber = huber_sum / sd;
    r.residual_norm = mm ? residual_sum / sd : std::numeric_limits<double>::quiet_NaN();
    r.runtime_per_sample = seconds / sd;
    r.mean_phase_offset = offset_sum / sd;
    return r;
}

nlohmann::json MetricsReport::to_json() const {
    auto num = [](double x) -> nlohmann::json { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
    return {{"method", method},
            {"samples", samples},
            {"vm_rmse", vm_rmse_all},
            {"va_rmse", va_rmse_all},
            {"state_rmse", state_rmse},
            {"huber", huber},
            {"residual_norm", num(residual_norm)},
            {"runtime_per_sample", runtime_per_sample},
            {"mean_phase_offset", mean_phase_offset},
            {"vm_rmse_per_bus", std::vector<double>(vm_rmse.data(), vm_rmse.data() + vm_rmse.size())},
            {"va_rmse_per_bus", std::vector<double>(va_rmse.data(), va_rmse.data() + va_rmse.size())}};
}

void MetricsReport::write_csv(std::ostream& out) const {
    out << "scope,bus,vm_rmse,va_rmse\n";
    for (Eigen::Index b = 0; b < vm_rmse.size(); ++b)
        out << "bus," << b + 1 << ',' << format_double(vm_rmse[b]) << ',' << format_double(va_rmse[b]) << '\n';
    out << "all,0," << format_double(vm_rmse_all) << ',' << format_double(va_rmse_all) << '\n';
}

void write_plot_csv(std::ostream& out, Eigen::MatrixXd const& truth, std::vector<PlotSeries> const& series) {
    out << "slot,bus,quantity,method,value\n";
    auto emit = [&](std::string const& method, Eigen::MatrixXd const& rows) {
        for (Eigen::Index s = 0; s < rows.rows(); ++s) {
            Eigen::VectorXcd c = to_complex(rows.row(s).transpose());
            for (Eigen::Index b = 0; b < c.size(); ++b) {
                out << s << ',' << b + 1 << ",vm," << method << ',' << format_double(std::abs(c[b])) << '\n';
                out << s << ',' << b + 1 << ",va," << method << ',' << format_double(std::arg(c[b])) << '\n';
            }
        }
    };
    emit("truth", truth);
    for (auto const& s : series) {
        if (s.states.rows() != truth.rows() || s.states.cols() != truth.cols())
            throw ShapeError("write_plot_csv: series '" + s.method + "' does not match the truth shape");
        emit(s.method, align_rows(s.states, truth));
    }
}

}  // namespace psse
