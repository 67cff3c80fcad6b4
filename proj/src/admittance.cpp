#include "psse/admittance.hpp"

#include <algorithm>
#include <queue>

namespace psse {

BranchAdmittance const* AdmittanceModel::find_branch(std::size_t branch) const {
    auto it = std::lower_bound(lines.begin(), lines.end(), branch,
                               [](BranchAdmittance const& a, std::size_t b) { return a.branch < b; });
    return (it != lines.end() && it->branch == branch) ? &*it : nullptr;
}

AdmittanceModel build_admittance(GridCase const& grid) {
    auto const n = grid.bus_count();
    AdmittanceModel model;
    model.y = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    model.slack = grid.slack_index();
    model.bus_shunt.resize(n);

    for (std::size_t k = 0; k < grid.branch_count(); ++k) {
        auto const& br = grid.branches[k];
        if (!br.in_service) continue;
        BranchAdmittance ba;
        ba.branch = k;
        ba.from = grid.index_of(br.from_id);
        ba.to = grid.index_of(br.to_id);
        ba.series = 1.0 / Complex(br.r, br.x);
        Complex const charging(0.0, br.b / 2.0);
        Complex const tap = std::polar(br.tap, br.shift);
        ba.ytt = ba.series + charging;
        ba.yff = ba.ytt / (tap * std::conj(tap));
        ba.yft = -ba.series / std::conj(tap);
        ba.ytf = -ba.series / tap;

        auto f = static_cast<Eigen::Index>(ba.from);
        auto t = static_cast<Eigen::Index>(ba.to);
        model.y(f, f) += ba.yff;
        model.y(f, t) += ba.yft;
        model.y(t, f) += ba.ytf;
        model.y(t, t) += ba.ytt;
        model.lines.push_back(ba);
    }

    for (std::size_t i = 0; i < n; ++i) {
        model.bus_shunt[i] = Complex(grid.buses[i].gs, grid.buses[i].bs);
        auto ii = static_cast<Eigen::Index>(i);
        model.y(ii, ii) += model.bus_shunt[i];
    }

    // Connectivity from the slack over in-service branches.
    std::vector<std::vector<std::size_t>> adj(n);
    for (auto const& ba : model.lines) {
        adj[ba.from].push_back(ba.to);
        adj[ba.to].push_back(ba.from);
    }
    std::vector<bool> reached(n, false);
    std::queue<std::size_t> frontier;
    frontier.push(model.slack);
    reached[model.slack] = true;
    while (!frontier.empty()) {
        auto u = frontier.front();
        frontier.pop();
        for (auto w : adj[u])
            if (!reached[w]) {
                reached[w] = true;
                frontier.push(w);
            }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!reached[i])
            model.warnings.push_back("bus " + std::to_string(grid.buses[i].id) +
                                     " is not connected to the slack bus");
    return model;
}

}  // namespace psse
