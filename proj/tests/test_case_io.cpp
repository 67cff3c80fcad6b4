#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fixtures.hpp"
#include "psse/checkpoint.hpp"
#include "psse/dataset.hpp"
#include "psse/error.hpp"
#include "psse/grid_case.hpp"
#include "psse/nn/fnn.hpp"
#include "psse/nn/train.hpp"
#include "psse/nn/unrolled.hpp"
#include "psse/shift_operator.hpp"

using namespace psse;

namespace {

std::string replace_line(std::string text, std::string const& from, std::string const& to) {
    auto at = text.find(from);
    REQUIRE(at != std::string::npos);
    return text.replace(at, from.size(), to);
}

Dataset small_dataset(std::size_t count) {
    Dataset d;
    d.selection.v_buses = {0, 1};
    d.selection.p_flows = {{0, FlowEnd::from}};
    d.measurement_dim = 3;
    d.state_dim = 4;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    for (std::size_t i = 0; i < count; ++i) {
        Sample s;
        s.z = Eigen::VectorXd::NullaryExpr(3, [&] { return n(rng); });
        s.v_star = Eigen::VectorXd::NullaryExpr(4, [&] { return n(rng) / 3.0; });
        s.split = i + 1 < count ? Split::train : Split::test;
        d.samples.push_back(s);
    }
    return d;
}

}  // namespace

TEST_CASE("two-bus fixture parses into per-unit tables") {
    GridCase g = parse_case(fixtures::two_bus);
    CHECK(g.bus_count() == 2);
    CHECK(g.branch_count() == 1);
    CHECK(g.slack_index() == 0);
    CHECK(g.buses[1].type == BusType::pq);
    CHECK(g.buses[1].pd == doctest::Approx(0.5));
    CHECK(g.buses[1].qd == doctest::Approx(0.2));
    CHECK(g.branches[0].tap == 1.0);
    CHECK(g.branches[0].r == 0.01);
    CHECK(g.branches[0].x == 0.1);
    CHECK(g.gens.size() == 1);
}

TEST_CASE("angles and shunts are converted at parse time") {
    GridCase g = parse_case(fixtures::five_bus);
    CHECK(g.buses[2].bs == doctest::Approx(0.05));
    CHECK(g.buses[3].gs == doctest::Approx(0.02));
    CHECK(g.branches[3].shift == doctest::Approx(3.0 * std::numbers::pi / 180.0));
    CHECK(g.branches[1].tap == doctest::Approx(0.98));
}

TEST_CASE("duplicate bus id is a parse error naming the id and line") {
    auto text = replace_line(fixtures::two_bus, "\t2\t1\t50", "\t1\t1\t50");
    try {
        parse_case(text);
        FAIL("expected a parse error");
    } catch (ParseError const& e) {
        std::string msg = e.what();
        CHECK(msg.find("1") != std::string::npos);
        CHECK(e.line() == 6);
    }
}

TEST_CASE("malformed row reports its line") {
    auto text = replace_line(fixtures::two_bus, "1\t2\t0.01\t0.1", "1\t2\tabc\t0.1");
    try {
        parse_case(text);
        FAIL("expected a parse error");
    } catch (ParseError const& e) {
        CHECK(e.line() == 12);
    }
}

TEST_CASE("zero impedance and missing slack are validation errors") {
    CHECK_THROWS_AS(parse_case(replace_line(fixtures::two_bus, "0.01\t0.1", "0\t0")), ValidationError);
    CHECK_THROWS_AS(parse_case(replace_line(fixtures::two_bus, "1\t3\t0", "1\t1\t0")), ValidationError);
    CHECK_THROWS_AS(parse_case(replace_line(fixtures::two_bus, "1\t2\t0.01", "1\t7\t0.01")), ValidationError);
}

TEST_CASE("out-of-service zero-impedance branch is accepted") {
    auto text = replace_line(fixtures::two_bus, "0.01\t0.1\t0.02\t250\t250\t250\t0\t0\t1",
                             "0\t0\t0.02\t250\t250\t250\t0\t0\t0");
    GridCase g = parse_case(text);
    CHECK_FALSE(g.branches[0].in_service);
}

TEST_CASE("short rows are rejected and extra columns warn") {
    CHECK_THROWS_AS(parse_case(replace_line(fixtures::two_bus, "\t2\t1\t50\t20\t0\t0\t1\t1.0\t0\t135\t1\t1.1\t0.9;",
                                            "\t2\t1\t50\t20;")),
                    ParseError);
    std::vector<std::string> warnings;
    auto text = replace_line(fixtures::two_bus, "1\t-360\t360;", "1\t-360\t360\t0\t0\t0\t0\t0\t0\t0\t0\t0\t7;");
    parse_case(text, &warnings);
    CHECK_FALSE(warnings.empty());
}

TEST_CASE("IEEE 14 and 118 bus cases load") {
    GridCase g14 = load_case_file(fixtures::data_path("case14.m"));
    CHECK(g14.bus_count() == 14);
    CHECK(g14.branch_count() == 20);
    GridCase g = load_case_file(fixtures::data_path("case118.m"));
    CHECK(g.bus_count() == 118);
    CHECK(g.branch_count() == 186);
    int slacks = 0;
    for (auto const& b : g.buses) slacks += b.type == BusType::slack;
    CHECK(slacks == 1);
    CHECK(g.buses[g.slack_index()].id == 69);
}

TEST_CASE("missing case file names the path") {
    try {
        load_case_file("/nonexistent/case.m");
        FAIL("expected an error");
    } catch (UsageError const& e) {
        CHECK(std::string(e.what()).find("/nonexistent/case.m") != std::string::npos);
    }
}

TEST_CASE("empty dataset round-trips") {
    Dataset d = small_dataset(0);
    std::stringstream s;
    save_dataset(d, s);
    Dataset back = load_dataset(s);
    CHECK(back.size() == 0);
    CHECK(back.measurement_dim == 3);
    CHECK(back.state_dim == 4);
    CHECK(back.selection == d.selection);
}

TEST_CASE("dataset round-trip is exact and re-serialization is byte-stable") {
    Dataset d = small_dataset(3);
    std::stringstream s1;
    save_dataset(d, s1);
    std::string const first = s1.str();
    Dataset back = load_dataset(s1);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.samples[i].z == d.samples[i].z);
        CHECK(back.samples[i].v_star == d.samples[i].v_star);
        CHECK(back.samples[i].split == d.samples[i].split);
    }
    std::stringstream s2;
    save_dataset(back, s2);
    CHECK(s2.str() == first);
}

TEST_CASE("dataset with a NaN entry is rejected with its position") {
    Dataset d = small_dataset(3);
    std::stringstream s;
    save_dataset(d, s);
    std::string text = s.str();
    std::istringstream lines(text);
    std::string header, row1, row2;
    std::getline(lines, header);
    std::getline(lines, row1);
    std::getline(lines, row2);
    auto comma = row2.find(',', row2.find(',') + 1);
    std::string bad = row2.substr(0, comma + 1) + "nan" + row2.substr(row2.find(',', comma + 1));
    std::string patched = text;
    patched.replace(patched.find(row2), row2.size(), bad);
    std::istringstream in(patched);
    try {
        load_dataset(in);
        FAIL("expected a format error");
    } catch (FormatError const& e) {
        std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("column 2") != std::string::npos);
    }
}

TEST_CASE("dataset rows with the wrong width are rejected") {
    Dataset d = small_dataset(2);
    std::stringstream s;
    save_dataset(d, s);
    std::string text = s.str();
    text.insert(text.size() - 1, ",0.5");
    std::istringstream in(text);
    CHECK_THROWS_AS(load_dataset(in), FormatError);
}

TEST_CASE("checkpoint round-trip is bit exact") {
    GridCase g = parse_case(fixtures::five_bus);
    auto adm = build_admittance(g);
    auto mm = build_measurement_model(adm, MeasurementSelection::full(g));
    nn::UnrolledConfig cfg;
    cfg.iterations = 2;
    auto model = nn::init_unrolled(cfg, build_shift_operator(g), mm, 1.0, nn::InitStrategy::warm, 4);

    TrainingMeta meta;
    meta.epoch = 3;
    meta.train_loss = {0.5, 0.25};
    meta.seed = 4;
    std::stringstream s;
    save_checkpoint(model, meta, s);
    Checkpoint cp = load_checkpoint(s);
    auto a = model.parameters();
    auto b = cp.model->parameters();
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(*a[k] == *b[k]);
    CHECK(cp.meta.epoch == 3);
    CHECK(cp.meta.train_loss == meta.train_loss);
    CHECK(cp.meta.seed == 4);
    auto* back = dynamic_cast<nn::UnrolledModel*>(cp.model.get());
    REQUIRE(back != nullptr);
    CHECK(back->shift().dense == model.shift().dense);
    CHECK(back->config().to_json() == model.config().to_json());
}

TEST_CASE("checkpoint with the wrong version is rejected") {
    nn::FnnModel model(3, 4, {5}, 1);
    std::stringstream s;
    save_checkpoint(model, {}, s);
    std::string text = s.str();
    auto at = text.find("\"version\":1");
    REQUIRE(at != std::string::npos);
    text.replace(at, 11, "\"version\":2");
    std::istringstream in(text);
    CHECK_THROWS_AS(load_checkpoint(in), FormatError);
}

TEST_CASE("truncated checkpoint is rejected") {
    nn::FnnModel model(3, 4, {5}, 1);
    std::stringstream s;
    save_checkpoint(model, {}, s);
    std::string text = s.str();
    text.resize(text.size() - 4);
    std::istringstream in(text);
    CHECK_THROWS_AS(load_checkpoint(in), FormatError);
}

TEST_CASE("trained model predicts identically after a checkpoint round-trip") {
    Dataset d = small_dataset(12);
    nn::FnnModel model(3, 4, {6, 6}, 2);
    nn::TrainOptions opts;
    opts.epochs = 5;
    opts.batch = 4;
    nn::train(model, d, opts);
    std::stringstream s;
    save_checkpoint(model, {}, s);
    Checkpoint cp = load_checkpoint(s);
    Eigen::MatrixXd z = d.measurement_rows(d.indices(Split::train));
    CHECK(model.predict(z) == cp.model->predict(z));
}
