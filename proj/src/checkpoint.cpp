#include "psse/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "psse/error.hpp"
#include "psse/nn/fnn.hpp"
#include "psse/nn/unrolled.hpp"

namespace psse {

namespace {

constexpr char const* format_tag = "psse-checkpoint";

void write_le(std::ostream& out, double x) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
    out.write(bytes, 8);
}

double read_le(std::istream& in, std::string const& name) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw FormatError("checkpoint: truncated data in tensor " + name);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

nlohmann::json finite_list(std::vector<double> const& xs) {
    nlohmann::json out = nlohmann::json::array();
    for (double x : xs) out.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
    return out;
}

}  // namespace

std::unique_ptr<nn::Estimator> model_from_architecture(nlohmann::json const& arch) {
    std::string kind;
    try {
        kind = arch.at("kind").get<std::string>();
    } catch (nlohmann::json::exception const& e) {
        throw FormatError(std::string("checkpoint architecture: ") + e.what());
    }
    if (kind == "unrolled") return std::make_unique<nn::UnrolledModel>(nn::UnrolledModel::from_architecture(arch));
    if (kind == "fnn") return std::make_unique<nn::FnnModel>(nn::FnnModel::from_architecture(arch));
    throw FormatError("checkpoint: unknown model kind '" + kind + "'");
}

void save_checkpoint(nn::Estimator const& model, TrainingMeta const& meta, std::ostream& out) {
    auto params = model.parameters();
    auto names = model.parameter_names();
    nlohmann::json tensors = nlohmann::json::array();
    for (std::size_t k = 0; k < params.size(); ++k)
        tensors.push_back({{"name", names.at(k)}, {"rows", params[k]->rows()}, {"cols", params[k]->cols()}});
    nlohmann::json header = {{"format", format_tag},
                             {"version", checkpoint_version},
                             {"architecture", model.architecture()},
                             {"tensors", tensors},
                             {"training",
                              {{"epoch", meta.epoch},
                               {"train_loss", finite_list(meta.train_loss)},
                               {"test_loss", finite_list(meta.test_loss)},
                               {"seed", meta.seed},
                               {"extra", meta.extra}}}};
    out << header.dump() << '\n';
    for (auto const* p : params)
        for (Eigen::Index i = 0; i < p->size(); ++i) write_le(out, p->data()[i]);
    if (!out) throw FormatError("checkpoint: write failed");
}

Checkpoint load_checkpoint(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("checkpoint: missing header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (nlohmann::json::exception const& e) {
        throw FormatError(std::string("checkpoint: header is not JSON: ") + e.what());
    }
    Checkpoint cp;
    try {
        if (header.at("format").get<std::string>() != format_tag)
            throw FormatError("checkpoint: not a checkpoint file (format '" + header.at("format").get<std::string>() + "')");
        int const version = header.at("version").get<int>();
        if (version != checkpoint_version)
            throw FormatError("checkpoint: unsupported version " + std::to_string(version) + " (expected " +
                              std::to_string(checkpoint_version) + ")");
        cp.model = model_from_architecture(header.at("architecture"));
        auto params = cp.model->parameters();
        auto names = cp.model->parameter_names();
        auto const& tensors = header.at("tensors");
        if (tensors.size() != params.size())
            throw FormatError("checkpoint: " + std::to_string(tensors.size()) + " tensors, architecture needs " +
                              std::to_string(params.size()));
        for (std::size_t k = 0; k < params.size(); ++k) {
            auto const& t = tensors[k];
            auto const name = t.at("name").get<std::string>();
            if (name != names[k] || t.at("rows").get<Eigen::Index>() != params[k]->rows() ||
                t.at("cols").get<Eigen::Index>() != params[k]->cols())
                throw FormatError("checkpoint: tensor " + std::to_string(k) + " ('" + name +
                                  "') does not match the architecture");
            for (Eigen::Index i = 0; i < params[k]->size(); ++i) params[k]->data()[i] = read_le(in, name);
        }
        auto const& tr = header.at("training");
        cp.meta.epoch = tr.at("epoch").get<int>();
        auto losses = [](nlohmann::json const& j) {
            std::vector<double> out;
            for (auto const& x : j) out.push_back(x.is_null() ? std::nan("") : x.get<double>());
            return out;
        };
        cp.meta.train_loss = losses(tr.at("train_loss"));
        cp.meta.test_loss = losses(tr.at("test_loss"));
        cp.meta.seed = tr.at("seed").get<std::uint64_t>();
        cp.meta.extra = tr.value("extra", nlohmann::json::object());
    } catch (nlohmann::json::exception const& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("checkpoint: trailing data after the last tensor");
    return cp;
}

void save_checkpoint_file(nn::Estimator const& model, TrainingMeta const& meta, std::string const& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot open '" + path + "' for writing");
    save_checkpoint(model, meta, out);
}

Checkpoint load_checkpoint_file(std::string const& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open checkpoint '" + path + "'");
    return load_checkpoint(in);
}

}  // namespace psse
