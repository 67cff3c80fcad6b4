#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace psse {

enum class BusType { pq = 1, pv = 2, slack = 3 };

/// Bus record. Powers and shunts are per-unit on the case base, angles in radians.
struct Bus {
    int id = 0;
    BusType type = BusType::pq;
    double pd = 0.0;
    double qd = 0.0;
    double gs = 0.0;
    double bs = 0.0;
    double vm = 1.0;
    double va = 0.0;
};

/// Pi-model branch. `tap` is the off-nominal ratio (1 for lines), `shift` in radians.
struct Branch {
    int from_id = 0;
    int to_id = 0;
    double r = 0.0;
    double x = 0.0;
    double b = 0.0;
    double tap = 1.0;
    double shift = 0.0;
    bool in_service = true;
};

struct Generator {
    int bus_id = 0;
    double pg = 0.0;
    double qg = 0.0;
    double vg = 1.0;
    bool in_service = true;
};

/// Parsed network description in per-unit.
///
/// Call `finalize()` after editing the tables by hand; it rebuilds the id
/// index and checks every invariant (unique ids, valid endpoints, exactly one
/// slack, no zero-impedance in-service branch).
struct GridCase {
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> gens;

    std::size_t bus_count() const noexcept { return buses.size(); }
    std::size_t branch_count() const noexcept { return branches.size(); }

    /// Position of a bus id in `buses`. Throws ValidationError for unknown ids.
    std::size_t index_of(int bus_id) const;
    std::size_t slack_index() const;
    std::size_t from_index(std::size_t branch) const { return index_of(branches.at(branch).from_id); }
    std::size_t to_index(std::size_t branch) const { return index_of(branches.at(branch).to_id); }

    /// Voltage set point of a bus: first in-service generator's Vg, else the bus Vm.
    double voltage_setpoint(std::size_t bus) const;

    void finalize();

  private:
    std::unordered_map<int, std::size_t> index_;
};

/// Parse a MATPOWER case (`mpc.baseMVA`, `mpc.bus`, `mpc.branch`, optional `mpc.gen`).
/// Unknown extra columns are dropped and reported through `warnings` when given.
GridCase parse_case(std::string_view text, std::vector<std::string>* warnings = nullptr);

/// Read and parse a case file. Throws psse::Error if the file cannot be opened.
GridCase load_case_file(std::string const& path, std::vector<std::string>* warnings = nullptr);

}  // namespace psse
