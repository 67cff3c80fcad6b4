#pragma once

#include <random>
#include <string>

#include <Eigen/Dense>

#include "psse/admittance.hpp"
#include "psse/grid_case.hpp"
#include "psse/measurement.hpp"
#include "psse/state.hpp"

namespace fixtures {

inline std::string data_path(std::string const& name) { return std::string(PSSE_DATA_DIR) + "/" + name; }

// Slack at bus 1, a 50 MW / 20 MVAr load at bus 2, one line.
inline constexpr char const* two_bus = R"(function mpc = two_bus
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1.0	0	135	1	1.1	0.9;
	2	1	50	20	0	0	1	1.0	0	135	1	1.1	0.9;
];
mpc.gen = [
	1	0	0	300	-300	1.0	100	1	250	10;
];
mpc.branch = [
	1	2	0.01	0.1	0.02	250	250	250	0	0	1	-360	360;
];
)";

// Five buses in a ring with a chord; a PV bus, a transformer tap and a phase shifter.
inline constexpr char const* five_bus = R"(function mpc = five_bus
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1.02	0	135	1	1.1	0.9;
	2	2	20	10	0	0	1	1.01	0	135	1	1.1	0.9;
	3	1	45	15	0	5	1	1.0	0	135	1	1.1	0.9;
	4	1	40	5	2	0	1	1.0	0	135	1	1.1	0.9;
	5	1	60	10	0	0	1	1.0	0	135	1	1.1	0.9;
];
mpc.gen = [
	1	0	0	300	-300	1.02	100	1	250	10;
	2	40	0	300	-300	1.01	100	1	250	10;
];
mpc.branch = [
	1	2	0.02	0.06	0.03	250	250	250	0	0	1	-360	360;
	2	3	0.01	0.05	0.02	250	250	250	0.98	0	1	-360	360;
	3	4	0.03	0.08	0.02	250	250	250	0	0	1	-360	360;
	4	5	0.02	0.07	0.01	250	250	250	1.02	3	1	-360	360;
	5	1	0.015	0.09	0.02	250	250	250	0	0	1	-360	360;
	2	4	0.04	0.12	0.01	250	250	250	0	0	1	-360	360;
];
)";

/// Random state with magnitudes in [0.9, 1.1] and angles in [−0.5, 0.5].
inline psse::StateVector random_state(Eigen::Index buses, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mag(0.9, 1.1), ang(-0.5, 0.5);
    Eigen::VectorXcd v(buses);
    for (Eigen::Index i = 0; i < buses; ++i) v[i] = std::polar(mag(rng), ang(rng));
    return psse::from_complex(v);
}

}  // namespace fixtures
