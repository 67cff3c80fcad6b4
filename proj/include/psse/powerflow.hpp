#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "psse/admittance.hpp"
#include "psse/dataset.hpp"
#include "psse/grid_case.hpp"
#include "psse/measurement.hpp"
#include "psse/state.hpp"

namespace psse {

/// Per-bus demand in per-unit.
struct LoadProfile {
    Eigen::VectorXd p;
    Eigen::VectorXd q;

    static LoadProfile nominal(GridCase const& grid);
};

struct PowerFlowOptions {
    int max_iterations = 20;
    double tolerance = 1e-10;  // max |ΔP|, |ΔQ| in p.u.
};

struct PowerFlowResult {
    StateVector state;  // slack angle is 0
    int iterations = 0;
    double max_mismatch = 0.0;
};

/// Polar Newton-Raphson from a flat start. PV buses hold |V| at their set
/// point; reactive limits are not enforced. Throws NoConvergenceError.
PowerFlowResult solve_powerflow(GridCase const& grid, AdmittanceModel const& adm, LoadProfile const& loads,
                                PowerFlowOptions const& opts = {});
PowerFlowResult solve_powerflow(GridCase const& grid, LoadProfile const& loads, PowerFlowOptions const& opts = {});

/// Complex injections S = V ∘ conj(Y V).
Eigen::VectorXcd bus_injections(AdmittanceModel const& adm, StateVector const& v);

/// Largest |ΔP| over non-slack buses and |ΔQ| over PQ buses.
double power_mismatch(GridCase const& grid, AdmittanceModel const& adm, LoadProfile const& loads,
                      StateVector const& v);

enum class LoadLaw {
    uniform,  // independent per-bus multipliers in [low, high]
    daily,    // shared 24-slot sinusoidal shape spanning [low, high], ±2% per-bus jitter
};

struct ScenarioConfig {
    std::size_t count = 1000;
    LoadLaw law = LoadLaw::uniform;
    double low = 0.8;
    double high = 1.2;
    std::uint64_t seed = 1;
    double train_fraction = 0.8;
    int max_retries = 10;
    unsigned threads = 1;

    void validate() const;
};

/// Loads for sample `index`, drawn from the sample's own rng stream.
LoadProfile sample_loads(GridCase const& grid, ScenarioConfig const& sc, std::size_t index, std::mt19937_64& rng);

/// Independent rng stream for one sample.
std::mt19937_64 sample_rng(std::uint64_t seed, std::size_t index);

/// Solve one power flow per scenario and measure it. The first
/// round(count·train_fraction) samples are tagged train, the rest test.
Dataset generate_dataset(GridCase const& grid, MeasurementModel const& mm, ScenarioConfig const& sc);

}  // namespace psse
