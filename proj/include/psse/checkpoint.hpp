#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "psse/nn/estimator.hpp"

namespace psse {

inline constexpr int checkpoint_version = 1;

struct TrainingMeta {
    int epoch = 0;
    std::vector<double> train_loss;
    std::vector<double> test_loss;
    std::uint64_t seed = 0;
    nlohmann::json extra = nlohmann::json::object();  // free-form run settings
};

struct Checkpoint {
    std::unique_ptr<nn::Estimator> model;
    TrainingMeta meta;
};

/// One JSON header line (format, version, architecture, tensor names and
/// shapes, training metadata), then every tensor as little-endian float64 in
/// row-major order.
void save_checkpoint(nn::Estimator const& model, TrainingMeta const& meta, std::ostream& out);
Checkpoint load_checkpoint(std::istream& in);
void save_checkpoint_file(nn::Estimator const& model, TrainingMeta const& meta, std::string const& path);
Checkpoint load_checkpoint_file(std::string const& path);

/// Rebuild a zero-initialized model from its architecture description.
std::unique_ptr<nn::Estimator> model_from_architecture(nlohmann::json const& arch);

}  // namespace psse
