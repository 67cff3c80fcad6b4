#include "psse/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "psse/error.hpp"

namespace psse {

namespace {

constexpr char const* dataset_format = "psse-dataset";
constexpr int dataset_version = 1;

nlohmann::json flows_to_json(std::vector<FlowMeter> const& flows) {
    auto arr = nlohmann::json::array();
    for (auto const& f : flows) arr.push_back({f.branch, f.end == FlowEnd::from ? "from" : "to"});
    return arr;
}

std::vector<FlowMeter> flows_from_json(nlohmann::json const& j) {
    std::vector<FlowMeter> flows;
    for (auto const& item : j) {
        if (!item.is_array() || item.size() != 2) throw FormatError("flow meter must be [branch, \"from\"|\"to\"]");
        auto end = item[1].get<std::string>();
        if (end != "from" && end != "to") throw FormatError("flow meter end must be \"from\" or \"to\"");
        flows.push_back({item[0].get<std::size_t>(), end == "from" ? FlowEnd::from : FlowEnd::to});
    }
    return flows;
}

double parse_field(std::string_view token, std::size_t row, std::size_t col) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw FormatError("row " + std::to_string(row) + ", column " + std::to_string(col) + ": malformed number '" +
                          std::string(token) + "'");
    if (!std::isfinite(value))
        throw FormatError("row " + std::to_string(row) + ", column " + std::to_string(col) + ": non-finite value");
    return value;
}

}  // namespace

std::string to_string(Split split) { return split == Split::train ? "train" : "test"; }

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::size_t Dataset::count(Split split) const {
    std::size_t c = 0;
    for (auto const& s : samples) c += s.split == split;
    return c;
}

std::vector<std::size_t> Dataset::indices(Split split) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (samples[i].split == split) out.push_back(i);
    return out;
}

Eigen::MatrixXd Dataset::measurement_rows(std::vector<std::size_t> const& which) const {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(which.size()), measurement_dim);
    for (std::size_t r = 0; r < which.size(); ++r) rows.row(static_cast<Eigen::Index>(r)) = samples.at(which[r]).z;
    return rows;
}

Eigen::MatrixXd Dataset::state_rows(std::vector<std::size_t> const& which) const {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(which.size()), state_dim);
    for (std::size_t r = 0; r < which.size(); ++r)
        rows.row(static_cast<Eigen::Index>(r)) = samples.at(which[r]).v_star;
    return rows;
}

void Dataset::validate() const {
    if (state_dim % 2 != 0) throw FormatError("state dimension must be even");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].z.size() != measurement_dim)
            throw FormatError("sample " + std::to_string(i) + ": measurement length " +
                              std::to_string(samples[i].z.size()) + " != " + std::to_string(measurement_dim));
        if (samples[i].v_star.size() != state_dim)
            throw FormatError("sample " + std::to_string(i) + ": state length " +
                              std::to_string(samples[i].v_star.size()) + " != " + std::to_string(state_dim));
    }
}

nlohmann::json selection_to_json(MeasurementSelection const& selection) {
    return {{"v_buses", selection.v_buses},
            {"p_buses", selection.p_buses},
            {"q_buses", selection.q_buses},
            {"p_flows", flows_to_json(selection.p_flows)},
            {"q_flows", flows_to_json(selection.q_flows)}};
}

MeasurementSelection selection_from_json(nlohmann::json const& j) {
    MeasurementSelection sel;
    auto list = [&](char const* key) {
        return j.contains(key) ? j.at(key).get<std::vector<std::size_t>>() : std::vector<std::size_t>{};
    };
    sel.v_buses = list("v_buses");
    sel.p_buses = list("p_buses");
    sel.q_buses = list("q_buses");
    if (j.contains("p_flows")) sel.p_flows = flows_from_json(j.at("p_flows"));
    if (j.contains("q_flows")) sel.q_flows = flows_from_json(j.at("q_flows"));
    return sel;
}

void save_dataset(Dataset const& dataset, std::ostream& out) {
    dataset.validate();
    nlohmann::json header = {
        {"format", dataset_format},
        {"version", dataset_version},
        {"measurement_dim", dataset.measurement_dim},
        {"state_dim", dataset.state_dim},
        {"count", dataset.size()},
        {"train_count", dataset.count(Split::train)},
        {"test_count", dataset.count(Split::test)},
        {"selection", selection_to_json(dataset.selection)},
        {"noise",
         {{"sigma_power", dataset.noise.sigma_power},
          {"sigma_magnitude", dataset.noise.sigma_magnitude},
          {"noise_on_modulus", dataset.noise.noise_on_modulus}}},
    };
    out << header.dump() << '\n';
    for (auto const& s : dataset.samples) {
        out << to_string(s.split);
        for (Eigen::Index i = 0; i < s.z.size(); ++i) out << ',' << format_double(s.z(i));
        for (Eigen::Index i = 0; i < s.v_star.size(); ++i) out << ',' << format_double(s.v_star(i));
        out << '\n';
    }
    if (!out) throw Error("failed writing dataset");
}

Dataset load_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("dataset is empty (missing header)");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (nlohmann::json::exception const& e) {
        throw FormatError(std::string("dataset header is not valid JSON: ") + e.what());
    }
    Dataset d;
    std::size_t count = 0;
    std::size_t train_count = 0;
    try {
        if (header.at("format").get<std::string>() != dataset_format) throw FormatError("not a psse dataset file");
        int version = header.at("version").get<int>();
        if (version != dataset_version)
            throw FormatError("unsupported dataset version " + std::to_string(version));
        d.measurement_dim = header.at("measurement_dim").get<Eigen::Index>();
        d.state_dim = header.at("state_dim").get<Eigen::Index>();
        count = header.at("count").get<std::size_t>();
        train_count = header.at("train_count").get<std::size_t>();
        d.selection = selection_from_json(header.at("selection"));
        if (header.contains("noise")) {
            auto const& n = header.at("noise");
            d.noise.sigma_power = n.value("sigma_power", d.noise.sigma_power);
            d.noise.sigma_magnitude = n.value("sigma_magnitude", d.noise.sigma_magnitude);
            d.noise.noise_on_modulus = n.value("noise_on_modulus", false);
        }
    } catch (nlohmann::json::exception const& e) {
        throw FormatError(std::string("dataset header: ") + e.what());
    }
    if (static_cast<Eigen::Index>(d.selection.size()) != d.measurement_dim)
        throw FormatError("header selection has " + std::to_string(d.selection.size()) +
                          " meters but measurement_dim is " + std::to_string(d.measurement_dim));

    auto const width = static_cast<std::size_t>(d.measurement_dim + d.state_dim);
    d.samples.reserve(count);
    for (std::size_t row = 1; row <= count; ++row) {
        if (!std::getline(in, line))
            throw FormatError("header declares " + std::to_string(count) + " samples, file has " +
                              std::to_string(row - 1));
        std::string_view rest(line);
        auto comma = rest.find(',');
        auto tag = rest.substr(0, comma);
        Sample s;
        if (tag == "train")
            s.split = Split::train;
        else if (tag == "test")
            s.split = Split::test;
        else
            throw FormatError("row " + std::to_string(row) + ": unknown split tag '" + std::string(tag) + "'");
        std::vector<double> values;
        values.reserve(width);
        while (comma != std::string_view::npos) {
            rest.remove_prefix(comma + 1);
            comma = rest.find(',');
            values.push_back(parse_field(rest.substr(0, comma), row, values.size() + 1));
        }
        if (values.size() != width)
            throw FormatError("row " + std::to_string(row) + ": expected " + std::to_string(width) + " values, got " +
                              std::to_string(values.size()));
        s.z = Eigen::Map<Eigen::VectorXd>(values.data(), d.measurement_dim);
        s.v_star = Eigen::Map<Eigen::VectorXd>(values.data() + d.measurement_dim, d.state_dim);
        d.samples.push_back(std::move(s));
    }
    while (std::getline(in, line))
        if (!line.empty()) throw FormatError("trailing data after " + std::to_string(count) + " samples");
    if (d.count(Split::train) != train_count)
        throw FormatError("header train_count " + std::to_string(train_count) + " does not match rows");
    d.validate();
    return d;
}

void save_dataset_file(Dataset const& dataset, std::string const& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write dataset file '" + path + "'");
    save_dataset(dataset, out);
}

Dataset load_dataset_file(std::string const& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open dataset file '" + path + "'");
    return load_dataset(in);
}

}  // namespace psse
