#include "psse/powerflow.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "psse/error.hpp"

namespace psse {

namespace {

Eigen::VectorXcd scheduled_injection(GridCase const& grid, LoadProfile const& loads) {
    auto const n = static_cast<Eigen::Index>(grid.bus_count());
    if (loads.p.size() != n || loads.q.size() != n)
        throw ShapeError("load profile has " + std::to_string(loads.p.size()) + " entries for " + std::to_string(n) +
                         " buses");
    Eigen::VectorXcd s(n);
    for (Eigen::Index i = 0; i < n; ++i) s(i) = Complex(-loads.p(i), -loads.q(i));
    for (auto const& g : grid.gens) {
        if (!g.in_service) continue;
        auto i = static_cast<Eigen::Index>(grid.index_of(g.bus_id));
        s(i) += Complex(g.pg, g.qg);
    }
    return s;
}

struct BusPartition {
    std::vector<Eigen::Index> pvpq;
    std::vector<Eigen::Index> pq;
};

BusPartition partition(GridCase const& grid) {
    BusPartition part;
    for (std::size_t i = 0; i < grid.bus_count(); ++i) {
        auto type = grid.buses[i].type;
        if (type == BusType::slack) continue;
        part.pvpq.push_back(static_cast<Eigen::Index>(i));
        if (type == BusType::pq) part.pq.push_back(static_cast<Eigen::Index>(i));
    }
    return part;
}

Eigen::VectorXd mismatch_vector(Eigen::VectorXcd const& mis, BusPartition const& part) {
    auto const npvpq = static_cast<Eigen::Index>(part.pvpq.size());
    Eigen::VectorXd f(npvpq + static_cast<Eigen::Index>(part.pq.size()));
    for (Eigen::Index k = 0; k < npvpq; ++k) f(k) = mis(part.pvpq[k]).real();
    for (std::size_t k = 0; k < part.pq.size(); ++k) f(npvpq + static_cast<Eigen::Index>(k)) = mis(part.pq[k]).imag();
    return f;
}

StateVector to_state(Eigen::VectorXd const& vm, Eigen::VectorXd const& va) {
    StateVector v(2 * vm.size());
    for (Eigen::Index i = 0; i < vm.size(); ++i) {
        v(2 * i) = vm(i) * std::cos(va(i));
        v(2 * i + 1) = vm(i) * std::sin(va(i));
    }
    return v;
}

}  // namespace

LoadProfile LoadProfile::nominal(GridCase const& grid) {
    auto const n = static_cast<Eigen::Index>(grid.bus_count());
    LoadProfile lp{Eigen::VectorXd(n), Eigen::VectorXd(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        lp.p(i) = grid.buses[static_cast<std::size_t>(i)].pd;
        lp.q(i) = grid.buses[static_cast<std::size_t>(i)].qd;
    }
    return lp;
}

Eigen::VectorXcd bus_injections(AdmittanceModel const& adm, StateVector const& v) {
    Eigen::VectorXcd vc = to_complex(v);
    if (vc.size() != adm.y.rows()) throw ShapeError("bus_injections: state does not match admittance size");
    Eigen::VectorXcd current = adm.y * vc;
    return vc.cwiseProduct(current.conjugate());
}

double power_mismatch(GridCase const& grid, AdmittanceModel const& adm, LoadProfile const& loads,
                      StateVector const& v) {
    Eigen::VectorXcd mis = bus_injections(adm, v) - scheduled_injection(grid, loads);
    auto f = mismatch_vector(mis, partition(grid));
    return f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff();
}

PowerFlowResult solve_powerflow(GridCase const& grid, AdmittanceModel const& adm, LoadProfile const& loads,
                                PowerFlowOptions const& opts) {
    auto const n = static_cast<Eigen::Index>(grid.bus_count());
    Eigen::VectorXcd const s_spec = scheduled_injection(grid, loads);
    BusPartition const part = partition(grid);
    auto const npvpq = static_cast<Eigen::Index>(part.pvpq.size());
    auto const npq = static_cast<Eigen::Index>(part.pq.size());

    Eigen::VectorXd vm(n);
    Eigen::VectorXd va = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i)
        vm(i) = grid.buses[static_cast<std::size_t>(i)].type == BusType::pq ? 1.0
                                                                            : grid.voltage_setpoint(static_cast<std::size_t>(i));

    auto const& y = adm.y;
    double worst = 0.0;
    for (int iter = 0;; ++iter) {
        Eigen::VectorXcd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = std::polar(vm(i), va(i));
        Eigen::VectorXcd current = y * v;
        Eigen::VectorXcd mis = v.cwiseProduct(current.conjugate()) - s_spec;
        Eigen::VectorXd f = mismatch_vector(mis, part);
        worst = f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff();
        if (!std::isfinite(worst) || worst > 1e10)
            throw NoConvergenceError("power flow diverged at iteration " + std::to_string(iter), worst);
        if (worst <= opts.tolerance) return {to_state(vm, va), iter, worst};
        if (iter >= opts.max_iterations)
            throw NoConvergenceError("power flow did not converge in " + std::to_string(opts.max_iterations) +
                                         " iterations (max mismatch " + std::to_string(worst) + " p.u.)",
                                     worst);

        // dS/dVa = j diag(V) conj(diag(I) − Y diag(V)); dS/dVm = diag(V) conj(Y diag(V/|V|)) + conj(diag(I)) diag(V/|V|)
        Eigen::VectorXcd unit = v.cwiseQuotient(vm.cast<Complex>());
        Eigen::MatrixXcd ds_dva = -(y * v.asDiagonal()).conjugate();
        ds_dva.diagonal() += current.conjugate();
        ds_dva = Complex(0.0, 1.0) * (v.asDiagonal() * ds_dva);
        Eigen::MatrixXcd ds_dvm = v.asDiagonal() * (y * unit.asDiagonal()).conjugate();
        ds_dvm.diagonal() += current.conjugate().cwiseProduct(unit);

        Eigen::MatrixXd jac(npvpq + npq, npvpq + npq);
        for (Eigen::Index r = 0; r < npvpq; ++r) {
            for (Eigen::Index c = 0; c < npvpq; ++c) jac(r, c) = ds_dva(part.pvpq[r], part.pvpq[c]).real();
            for (Eigen::Index c = 0; c < npq; ++c) jac(r, npvpq + c) = ds_dvm(part.pvpq[r], part.pq[c]).real();
        }
        for (Eigen::Index r = 0; r < npq; ++r) {
            for (Eigen::Index c = 0; c < npvpq; ++c) jac(npvpq + r, c) = ds_dva(part.pq[r], part.pvpq[c]).imag();
            for (Eigen::Index c = 0; c < npq; ++c) jac(npvpq + r, npvpq + c) = ds_dvm(part.pq[r], part.pq[c]).imag();
        }
        Eigen::VectorXd dx = -jac.partialPivLu().solve(f);
        for (Eigen::Index k = 0; k < npvpq; ++k) va(part.pvpq[k]) += dx(k);
        for (Eigen::Index k = 0; k < npq; ++k) vm(part.pq[k]) += dx(npvpq + k);
    }
}

PowerFlowResult solve_powerflow(GridCase const& grid, LoadProfile const& loads, PowerFlowOptions const& opts) {
    return solve_powerflow(grid, build_admittance(grid), loads, opts);
}

void ScenarioConfig::validate() const {
    if (count == 0) throw ConfigError("scenario count must be positive");
    if (!(low > 0.0) || !(high >= low)) throw ConfigError("load multiplier range must be positive and ordered");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
    if (max_retries < 0) throw ConfigError("retry budget must be non-negative");
    if (threads == 0) throw ConfigError("thread count must be positive");
}

std::mt19937_64 sample_rng(std::uint64_t seed, std::size_t index) {
    auto idx = static_cast<std::uint64_t>(index);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32)};
    return std::mt19937_64(seq);
}

LoadProfile sample_loads(GridCase const& grid, ScenarioConfig const& sc, std::size_t index, std::mt19937_64& rng) {
    LoadProfile lp = LoadProfile::nominal(grid);
    auto const n = lp.p.size();
    if (sc.law == LoadLaw::uniform) {
        std::uniform_real_distribution<double> mult(sc.low, sc.high);
        for (Eigen::Index i = 0; i < n; ++i) {
            double m = mult(rng);
            lp.p(i) *= m;
            lp.q(i) *= m;
        }
    } else {
        double const mid = 0.5 * (sc.low + sc.high);
        double const amp = 0.5 * (sc.high - sc.low);
        double const shape = mid + amp * std::sin(2.0 * std::numbers::pi * static_cast<double>(index % 24) / 24.0);
        std::uniform_real_distribution<double> jitter(0.98, 1.02);
        for (Eigen::Index i = 0; i < n; ++i) {
            double m = shape * jitter(rng);
            lp.p(i) *= m;
            lp.q(i) *= m;
        }
    }
    return lp;
}

Dataset generate_dataset(GridCase const& grid, MeasurementModel const& mm, ScenarioConfig const& sc) {
    sc.validate();
    AdmittanceModel const adm = build_admittance(grid);
    if (mm.state_dim() != 2 * static_cast<Eigen::Index>(grid.bus_count()))
        throw ShapeError("measurement model does not match the case");

    Dataset d;
    d.selection = mm.selection();
    d.noise = mm.noise();
    d.measurement_dim = static_cast<Eigen::Index>(mm.size());
    d.state_dim = mm.state_dim();
    d.samples.resize(sc.count);
    auto const train =
        static_cast<std::size_t>(std::llround(static_cast<double>(sc.count) * sc.train_fraction));

    std::vector<std::exception_ptr> failures(sc.count);
    auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < sc.count; i += stride) {
            try {
                auto rng = sample_rng(sc.seed, i);
                for (int attempt = 0;; ++attempt) {
                    LoadProfile loads = sample_loads(grid, sc, i, rng);
                    try {
                        auto pf = solve_powerflow(grid, adm, loads);
                        Sample& s = d.samples[i];
                        s.v_star = pf.state;
                        s.z = mm.add_noise(mm.evaluate(pf.state), rng);
                        s.split = i < train ? Split::train : Split::test;
                        break;
                    } catch (NoConvergenceError const& e) {
                        if (attempt >= sc.max_retries)
                            throw NumericalError("sample " + std::to_string(i) + ": power flow failed after " +
                                                 std::to_string(attempt + 1) + " attempts: " + e.what());
                    }
                }
            } catch (...) {
                failures[i] = std::current_exception();
                return;
            }
        }
    };

    unsigned const workers = std::min<unsigned>(sc.threads, static_cast<unsigned>(sc.count));
    if (workers <= 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
        for (auto& t : pool) t.join();
    }
    for (auto const& f : failures)
        if (f) std::rethrow_exception(f);
    return d;
}

}  // namespace psse
