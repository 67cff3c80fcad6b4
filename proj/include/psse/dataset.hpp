#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "psse/measurement.hpp"
#include "psse/state.hpp"

namespace psse {

enum class Split { train, test };

struct Sample {
    Eigen::VectorXd z;
    StateVector v_star;
    Split split = Split::train;
};

/// Measurement/state pairs sharing one selection.
struct Dataset {
    MeasurementSelection selection;
    NoiseConfig noise;
    Eigen::Index measurement_dim = 0;
    Eigen::Index state_dim = 0;
    std::vector<Sample> samples;

    std::size_t size() const noexcept { return samples.size(); }
    std::size_t count(Split split) const;
    std::vector<std::size_t> indices(Split split) const;

    /// Stack the z (resp. v*) vectors of the given samples as rows.
    Eigen::MatrixXd measurement_rows(std::vector<std::size_t> const& which) const;
    Eigen::MatrixXd state_rows(std::vector<std::size_t> const& which) const;

    /// Throws FormatError when any sample disagrees with the declared dimensions.
    void validate() const;
};

/// Text format: one JSON header line, then one CSV row per sample:
/// `split,z_1,...,z_M,v_1,...,v_2N` with shortest round-trip decimal formatting.
void save_dataset(Dataset const& dataset, std::ostream& out);
Dataset load_dataset(std::istream& in);
void save_dataset_file(Dataset const& dataset, std::string const& path);
Dataset load_dataset_file(std::string const& path);

nlohmann::json selection_to_json(MeasurementSelection const& selection);
MeasurementSelection selection_from_json(nlohmann::json const& j);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

std::string to_string(Split split);

}  // namespace psse
