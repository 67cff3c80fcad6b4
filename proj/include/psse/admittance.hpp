#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "psse/grid_case.hpp"

namespace psse {

using Complex = std::complex<double>;

/// Two-port admittances of one in-service branch:
/// I_from = yff V_from + yft V_to, I_to = ytf V_from + ytt V_to.
struct BranchAdmittance {
    std::size_t branch = 0;  // row in GridCase::branches
    std::size_t from = 0;    // bus positions
    std::size_t to = 0;
    Complex series;  // 1 / (r + jx)
    Complex yff, yft, ytf, ytt;
};

struct AdmittanceModel {
    Eigen::MatrixXcd y;                  // N x N bus admittance, per-unit
    std::vector<BranchAdmittance> lines;  // in-service branches only, table order
    std::vector<Complex> bus_shunt;       // gs + j bs per bus
    std::size_t slack = 0;
    std::vector<std::string> warnings;    // e.g. disconnected buses

    std::size_t bus_count() const noexcept { return static_cast<std::size_t>(y.rows()); }

    /// Branch admittance record for a GridCase branch row, or nullptr if out of service.
    BranchAdmittance const* find_branch(std::size_t branch) const;
};

/// Standard pi-model stamping with off-nominal taps and phase shifters.
AdmittanceModel build_admittance(GridCase const& grid);

}  // namespace psse
