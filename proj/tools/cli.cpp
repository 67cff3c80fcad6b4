#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "psse/admittance.hpp"
#include "psse/checkpoint.hpp"
#include "psse/dataset.hpp"
#include "psse/error.hpp"
#include "psse/grid_case.hpp"
#include "psse/measurement.hpp"
#include "psse/metrics.hpp"
#include "psse/nn/fnn.hpp"
#include "psse/nn/train.hpp"
#include "psse/nn/unrolled.hpp"
#include "psse/powerflow.hpp"
#include "psse/robust.hpp"
#include "psse/shift_operator.hpp"
#include "psse/solvers.hpp"

namespace psse::cli {

namespace {

using json = nlohmann::json;

json load_config(std::string const& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (json::exception const& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
}

/// Flag value if given, else the config entry at `pointer`, else `fallback`.
template <class T>
T pick(std::optional<T> const& flag, json const& cfg, std::string const& pointer, T fallback) {
    if (flag) return *flag;
    try {
        json::json_pointer p(pointer);
        if (cfg.contains(p)) return cfg.at(p).get<T>();
    } catch (json::exception const& e) {
        throw ConfigError("config entry " + pointer + ": " + e.what());
    }
    return fallback;
}

json section(json const& cfg, char const* key) {
    return cfg.contains(key) ? cfg.at(key) : json::object();
}

LoadLaw parse_law(std::string const& name) {
    if (name == "uniform") return LoadLaw::uniform;
    if (name == "daily") return LoadLaw::daily;
    throw ConfigError("unknown load law '" + name + "' (expected uniform or daily)");
}

MeasurementSelection selection_named(std::string const& name, GridCase const& grid) {
    if (name == "default") return MeasurementSelection::sending_end_default(grid);
    if (name == "full") return MeasurementSelection::full(grid);
    if (name == "magnitudes") return MeasurementSelection::magnitudes_only(grid);
    throw ConfigError("unknown selection '" + name + "' (expected default, full or magnitudes)");
}

struct Grid {
    GridCase grid;
    AdmittanceModel adm;
};

Grid load_grid(std::string const& path, std::ostream& err) {
    std::vector<std::string> warnings;
    Grid g{load_case_file(path, &warnings), {}};
    g.adm = build_admittance(g.grid);
    for (auto const& w : warnings) err << "warning: " << w << '\n';
    for (auto const& w : g.adm.warnings) err << "warning: " << w << '\n';
    return g;
}

MeasurementModel model_for(Grid const& g, Dataset const& data) {
    auto mm = build_measurement_model(g.adm, data.selection, data.noise);
    if (static_cast<Eigen::Index>(mm.size()) != data.measurement_dim || mm.state_dim() != data.state_dim)
        throw ShapeError("case does not match the dataset: case gives " + std::to_string(mm.size()) +
                         " measurements and " + std::to_string(mm.state_dim()) + " states, dataset has " +
                         std::to_string(data.measurement_dim) + " and " + std::to_string(data.state_dim));
    return mm;
}

void require_dims(nn::Estimator const& model, Dataset const& data, std::string const& what) {
    if (model.measurement_dim() != data.measurement_dim || model.state_dim() != data.state_dim)
        throw ShapeError(what + " expects " + std::to_string(model.measurement_dim()) + " measurements and " +
                         std::to_string(model.state_dim()) + " states, dataset has " +
                         std::to_string(data.measurement_dim) + " and " + std::to_string(data.state_dim));
}

std::ofstream open_out(std::filesystem::path const& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write '" + path.string() + "'");
    return out;
}

void write_history(std::filesystem::path const& path, nn::TrainHistory const& h) {
    auto out = open_out(path);
    out << "epoch,train_loss,test_loss\n";
    for (std::size_t e = 0; e < h.train_loss.size(); ++e) {
        out << e << ',' << format_double(h.train_loss[e]) << ',';
        if (e < h.test_loss.size()) out << format_double(h.test_loss[e]);
        out << '\n';
    }
}

void write_json(std::filesystem::path const& path, json const& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

// --- gen-data ---------------------------------------------------------------

struct GenDataArgs {
    std::string case_path, out_path, config;
    std::optional<std::size_t> count;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> law, selection;
    std::optional<double> low, high, train_fraction, sigma_power, sigma_magnitude;
    std::optional<unsigned> threads;
    bool noiseless = false;
};

int gen_data(GenDataArgs const& a, std::ostream& out, std::ostream& err) {
    json const cfg = load_config(a.config);
    ScenarioConfig sc;
    sc.count = pick(a.count, cfg, "/scenario/count", sc.count);
    sc.seed = pick(a.seed, cfg, "/scenario/seed", sc.seed);
    sc.law = parse_law(pick(a.law, cfg, "/scenario/law", std::string("uniform")));
    sc.low = pick(a.low, cfg, "/scenario/low", sc.low);
    sc.high = pick(a.high, cfg, "/scenario/high", sc.high);
    sc.train_fraction = pick(a.train_fraction, cfg, "/scenario/train_fraction", sc.train_fraction);
    sc.threads = pick(a.threads, cfg, "/scenario/threads", sc.threads);
    sc.validate();

    NoiseConfig noise;
    noise.sigma_power = pick(a.sigma_power, cfg, "/noise/sigma_power", noise.sigma_power);
    noise.sigma_magnitude = pick(a.sigma_magnitude, cfg, "/noise/sigma_magnitude", noise.sigma_magnitude);
    noise.noise_on_modulus = pick(std::optional<bool>{}, cfg, "/noise/noise_on_modulus", noise.noise_on_modulus);
    if (a.noiseless || pick(std::optional<bool>{}, cfg, "/noise/noiseless", false)) {
        noise.sigma_power = 0.0;
        noise.sigma_magnitude = 0.0;
    }
    noise.validate();

    Grid g = load_grid(a.case_path, err);
    MeasurementSelection selection;
    if (!a.selection && cfg.contains("selection") && cfg.at("selection").is_object())
        selection = selection_from_json(cfg.at("selection"));
    else
        selection = selection_named(pick(a.selection, cfg, "/selection", std::string("default")), g.grid);

    auto mm = build_measurement_model(g.adm, selection, noise);
    Dataset d = generate_dataset(g.grid, mm, sc);
    save_dataset_file(d, a.out_path);
    out << "buses " << g.grid.buses.size() << ", branches " << g.adm.lines.size() << ", measurements "
        << d.measurement_dim << ", samples " << d.size() << " (train " << d.count(Split::train) << ", test "
        << d.count(Split::test) << ")\n";
    return 0;
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
    std::string data_path, case_path, out_path, history_path, config;
    std::optional<std::string> model, init, shift_kind, weighting;
    std::optional<int> epochs, iterations, fnn_layers, fnn_width, hops, hidden, gnn_layers, steps;
    std::optional<std::size_t> batch;
    std::optional<double> lr, lambda, gamma, eta, rho, huber_delta;
    std::optional<std::uint64_t> seed;
    bool robust = false, tied = false, normalize = false;
};

RobustConfig robust_config(json const& cfg, std::optional<double> gamma, std::optional<double> eta,
                           std::optional<double> rho, std::optional<int> steps, bool normalize,
                           std::optional<double> huber_delta) {
    RobustConfig rc = RobustConfig::from_json(section(cfg, "robust"));
    if (gamma) rc.gamma = *gamma;
    if (eta) rc.eta = *eta;
    if (rho) rc.rho = *rho;
    if (steps) rc.steps = *steps;
    if (normalize) rc.normalize = true;
    rc.huber_delta = pick(huber_delta, cfg, "/train/huber_delta", rc.huber_delta);
    rc.validate();
    return rc;
}

int train_cmd(TrainArgs const& a, std::ostream& out, std::ostream& err) {
    json const cfg = load_config(a.config);

    nn::TrainOptions opts;
    opts.epochs = pick(a.epochs, cfg, "/train/epochs", opts.epochs);
    opts.batch = pick(a.batch, cfg, "/train/batch", opts.batch);
    opts.lr = pick(a.lr, cfg, "/train/lr", opts.lr);
    opts.seed = pick(a.seed, cfg, "/train/seed", opts.seed);
    opts.huber_delta = pick(a.huber_delta, cfg, "/train/huber_delta", opts.huber_delta);
    opts.validate();

    bool const robust = a.robust || pick(std::optional<bool>{}, cfg, "/train/robust", false);
    RobustConfig const rc = robust_config(cfg, a.gamma, a.eta, a.rho, a.steps, a.normalize, a.huber_delta);

    std::string const kind = pick(a.model, cfg, "/model", std::string("unrolled"));
    std::unique_ptr<nn::Estimator> model;
    json extra = {{"model", kind}, {"robust", robust}};
    if (robust) extra["robust_config"] = rc.to_json();

    Dataset const data = load_dataset_file(a.data_path);
    if (kind == "unrolled") {
        nn::UnrolledConfig ucfg = nn::UnrolledConfig::from_json(section(cfg, "unrolled"));
        if (a.iterations) ucfg.iterations = *a.iterations;
        if (a.tied) ucfg.tied = true;
        if (a.hops || a.hidden || a.gnn_layers)
            ucfg.gnn = nn::GnnConfig::uniform(a.gnn_layers.value_or(ucfg.gnn.layers()),
                                              a.hops.value_or(ucfg.gnn.hops.front()),
                                              a.hidden.value_or(ucfg.gnn.layers() > 1 ? ucfg.gnn.widths[1] : 8));
        ucfg.validate();
        auto const init = nn::parse_init_strategy(pick(a.init, cfg, "/init", std::string("warm")));
        double const lambda = pick(a.lambda, cfg, "/lambda", 1.0);
        if (init == nn::InitStrategy::warm && !(lambda > 0.0))
            throw ConfigError("warm start needs --lambda > 0, got " + std::to_string(lambda));
        auto const shift_kind = parse_shift_kind(pick(a.shift_kind, cfg, "/shift/kind", std::string("normalized-adjacency")));
        auto const weighting =
            parse_edge_weighting(pick(a.weighting, cfg, "/shift/weighting", std::string("admittance-magnitude")));
        if (a.case_path.empty()) throw UsageError("train: --case is required for the unrolled model");

        Grid g = load_grid(a.case_path, err);
        auto mm = model_for(g, data);
        auto shift = build_shift_operator(g.grid, shift_kind, weighting);
        model = std::make_unique<nn::UnrolledModel>(nn::init_unrolled(ucfg, shift, mm, lambda, init, opts.seed));
        extra["init"] = nn::to_string(init);
        extra["lambda"] = lambda;
    } else if (kind == "fnn") {
        int const layers = pick(a.fnn_layers, cfg, "/fnn/layers", 6);
        int const width = pick(a.fnn_width, cfg, "/fnn/width", 128);
        if (layers < 1 || width < 1) throw ConfigError("fnn: layers and width must be positive");
        model = std::make_unique<nn::FnnModel>(data.measurement_dim, data.state_dim,
                                               std::vector<int>(static_cast<std::size_t>(layers - 1), width), opts.seed);
    } else {
        throw ConfigError("unknown model '" + kind + "' (expected unrolled or fnn)");
    }
    require_dims(*model, data, "model");

    auto const t0 = std::chrono::steady_clock::now();
    nn::TrainHistory h = robust ? robust_train(*model, data, rc, opts) : nn::train(*model, data, opts);
    double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    TrainingMeta meta;
    meta.epoch = opts.epochs;
    meta.train_loss = h.train_loss;
    meta.test_loss = h.test_loss;
    meta.seed = opts.seed;
    meta.extra = extra;
    save_checkpoint_file(*model, meta, a.out_path);
    if (!a.history_path.empty()) write_history(a.history_path, h);

    out << kind << (robust ? " (robust)" : "") << ": " << model->parameter_count() << " parameters, " << opts.epochs
        << " epochs in " << secs << " s, train loss " << h.train_loss.front() << " -> " << h.train_loss.back();
    if (!h.test_loss.empty()) out << ", test loss " << h.test_loss.front() << " -> " << h.test_loss.back();
    out << '\n';
    return 0;
}

// --- eval -------------------------------------------------------------------

struct EvalArgs {
    std::string data_path, case_path, out_dir;
    std::vector<std::string> checkpoints;
    std::vector<std::string> solvers;
    std::optional<int> max_iterations;
    double huber_delta = 1.0;
};

int eval_cmd(EvalArgs const& a, std::ostream& out, std::ostream& err) {
    if (a.checkpoints.empty() && a.solvers.empty())
        throw UsageError("eval: give at least one --checkpoint or --solver");
    Dataset const data = load_dataset_file(a.data_path);
    auto const ids = data.indices(Split::test);
    if (ids.empty()) throw UsageError("eval: the dataset has no test samples");
    Eigen::MatrixXd const z = data.measurement_rows(ids);
    Eigen::MatrixXd const truth = data.state_rows(ids);

    std::optional<Grid> grid;
    std::optional<MeasurementModel> mm;
    if (!a.case_path.empty()) {
        grid = load_grid(a.case_path, err);
        mm = model_for(*grid, data);
    }

    std::vector<MetricsReport> reports;
    std::vector<PlotSeries> series;
    for (std::size_t c = 0; c < a.checkpoints.size(); ++c) {
        auto cp = load_checkpoint_file(a.checkpoints[c]);
        require_dims(*cp.model, data, "checkpoint '" + a.checkpoints[c] + "'");
        std::string name = std::filesystem::path(a.checkpoints[c]).stem().string();
        auto rep = evaluate_on(*cp.model, name, z, truth, mm ? &*mm : nullptr, a.huber_delta);
        series.push_back({name, cp.model->predict(z)});
        reports.push_back(std::move(rep));
    }
    for (auto const& s : a.solvers) {
        if (s != "gn") throw UsageError("eval: unknown solver '" + s + "' (expected gn)");
        if (!mm) throw UsageError("eval: --solver gn needs --case");
        SolverOptions so;
        so.max_iterations = a.max_iterations.value_or(so.max_iterations);
        so.validate();
        Eigen::MatrixXd est(z.rows(), truth.cols());
        auto const t0 = std::chrono::steady_clock::now();
        for (Eigen::Index r = 0; r < z.rows(); ++r)
            est.row(r) = gauss_newton(z.row(r).transpose(), *mm, flat_start(mm->bus_count()), so).state.transpose();
        double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        reports.push_back(compute_metrics("gauss_newton", est, truth, z, &*mm, secs, a.huber_delta));
        series.push_back({"gauss_newton", est});
    }

    std::filesystem::path const dir(a.out_dir);
    json all = json::array();
    for (auto const& r : reports) {
        all.push_back(r.to_json());
        auto csv = open_out(dir / ("metrics_" + r.method + ".csv"));
        r.write_csv(csv);
        out << r.method << ": vm_rmse " << r.vm_rmse_all << ", va_rmse " << r.va_rmse_all << ", huber " << r.huber
            << '\n';
    }
    write_json(dir / "metrics.json", all);
    auto plot = open_out(dir / "plot.csv");
    write_plot_csv(plot, truth, series);
    return 0;
}

// --- attack-eval ------------------------------------------------------------

struct AttackArgs {
    std::string data_path, case_path, checkpoint, compare, out_dir, config;
    std::optional<double> gamma, eta, rho, huber_delta;
    std::optional<int> steps;
    bool normalize = false;
};

void write_pairs(std::filesystem::path const& path, Eigen::MatrixXd const& truth, Eigen::MatrixXd const& clean,
                 Eigen::MatrixXd const& attacked) {
    auto out = open_out(path);
    out << "slot,bus,vm_true,va_true,vm_clean,va_clean,vm_attacked,va_attacked\n";
    Eigen::MatrixXd const c = align_rows(clean, truth);
    Eigen::MatrixXd const at = align_rows(attacked, truth);
    for (Eigen::Index s = 0; s < truth.rows(); ++s) {
        Eigen::VectorXcd t = to_complex(truth.row(s).transpose());
        Eigen::VectorXcd cc = to_complex(c.row(s).transpose());
        Eigen::VectorXcd ac = to_complex(at.row(s).transpose());
        for (Eigen::Index b = 0; b < t.size(); ++b)
            out << s << ',' << b + 1 << ',' << format_double(std::abs(t[b])) << ',' << format_double(std::arg(t[b]))
                << ',' << format_double(std::abs(cc[b])) << ',' << format_double(std::arg(cc[b])) << ','
                << format_double(std::abs(ac[b])) << ',' << format_double(std::arg(ac[b])) << '\n';
    }
}

int attack_cmd(AttackArgs const& a, std::ostream& out, std::ostream& err) {
    json const cfg = load_config(a.config);
    RobustConfig const rc = robust_config(cfg, a.gamma, a.eta, a.rho, a.steps, a.normalize, a.huber_delta);
    Dataset const data = load_dataset_file(a.data_path);
    auto cp = load_checkpoint_file(a.checkpoint);
    require_dims(*cp.model, data, "checkpoint '" + a.checkpoint + "'");

    std::optional<Grid> grid;
    std::optional<MeasurementModel> mm;
    if (!a.case_path.empty()) {
        grid = load_grid(a.case_path, err);
        mm = model_for(*grid, data);
    }
    MeasurementModel const* mmp = mm ? &*mm : nullptr;

    AttackReport rep = attack_eval(*cp.model, data, rc, mmp);
    Eigen::MatrixXd const truth = data.state_rows(rep.samples);
    json result = {{"robust_config", rc.to_json()},
                   {"clean", rep.clean.to_json()},
                   {"attacked", rep.attacked.to_json()},
                   {"mean_psi", rep.mean_psi},
                   {"mean_cost", rep.mean_cost}};

    std::filesystem::path const dir(a.out_dir);
    write_pairs(dir / "attack_pairs.csv", truth, rep.clean_estimates, rep.attacked_estimates);
    out << "clean huber " << rep.clean.huber << ", attacked huber " << rep.attacked.huber << ", mean psi "
        << rep.mean_psi << '\n';

    if (!a.compare.empty()) {
        auto other = load_checkpoint_file(a.compare);
        require_dims(*other.model, data, "checkpoint '" + a.compare + "'");
        Eigen::MatrixXd const z = data.measurement_rows(rep.samples);
        auto clean = evaluate_on(*other.model, other.model->kind(), z, truth, mmp, rc.huber_delta);
        auto attacked = evaluate_on(*other.model, other.model->kind(), rep.z_attacked, truth, mmp, rc.huber_delta);
        result["compare"] = {{"checkpoint", a.compare},
                             {"clean", clean.to_json()},
                             {"attacked", attacked.to_json()},
                             {"loss_gap", attacked.huber - rep.attacked.huber}};
        write_pairs(dir / "attack_pairs_compare.csv", truth, other.model->predict(z), other.model->predict(rep.z_attacked));
        out << "compare attacked huber " << attacked.huber << ", gap " << attacked.huber - rep.attacked.huber << '\n';
    }
    write_json(dir / "attack.json", result);
    return 0;
}

}  // namespace

int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Power-system state estimation toolkit", "psse"};
    app.require_subcommand(1);

    GenDataArgs g;
    auto* gen = app.add_subcommand("gen-data", "Solve power flows for random load scenarios and record measurements");
    gen->add_option("--case", g.case_path, "MATPOWER case file")->required();
    gen->add_option("--out", g.out_path, "Dataset file to write")->required();
    gen->add_option("--config", g.config, "JSON config file");
    gen->add_option("--count", g.count, "Number of samples");
    gen->add_option("--seed", g.seed, "Random seed");
    gen->add_option("--law", g.law, "Load law: uniform or daily");
    gen->add_option("--low", g.low, "Lowest load multiplier");
    gen->add_option("--high", g.high, "Highest load multiplier");
    gen->add_option("--train-fraction", g.train_fraction, "Fraction of samples tagged train");
    gen->add_option("--selection", g.selection, "Meters: default, full or magnitudes");
    gen->add_option("--sigma-power", g.sigma_power, "Noise std of power meters (p.u.)");
    gen->add_option("--sigma-magnitude", g.sigma_magnitude, "Noise std of squared-magnitude meters");
    gen->add_flag("--noiseless", g.noiseless, "Record exact measurements");
    gen->add_option("--threads", g.threads, "Worker threads");

    TrainArgs t;
    auto* tr = app.add_subcommand("train", "Train an estimator on a dataset");
    tr->add_option("--data", t.data_path, "Dataset file")->required();
    tr->add_option("--case", t.case_path, "Case file the dataset was generated from");
    tr->add_option("--out", t.out_path, "Checkpoint file to write")->required();
    tr->add_option("--history", t.history_path, "Per-epoch loss CSV");
    tr->add_option("--config", t.config, "JSON config file");
    tr->add_option("--model", t.model, "unrolled or fnn");
    tr->add_option("--init", t.init, "warm or random");
    tr->add_option("--lambda", t.lambda, "Prior weight for the warm start");
    tr->add_option("--iterations", t.iterations, "Unrolled iterations I");
    tr->add_option("--gnn-layers", t.gnn_layers, "Graph convolution layers");
    tr->add_option("--hops", t.hops, "Hops per graph convolution");
    tr->add_option("--hidden", t.hidden, "Hidden features per node");
    tr->add_option("--shift", t.shift_kind, "Shift operator kind");
    tr->add_option("--weighting", t.weighting, "Edge weighting: binary or admittance-magnitude");
    tr->add_flag("--tied", t.tied, "Share prior weights across iterations");
    tr->add_option("--fnn-layers", t.fnn_layers, "Dense layers of the fnn model");
    tr->add_option("--fnn-width", t.fnn_width, "Hidden width of the fnn model");
    tr->add_option("--epochs", t.epochs, "Training epochs");
    tr->add_option("--batch", t.batch, "Mini-batch size");
    tr->add_option("--lr", t.lr, "Adam learning rate");
    tr->add_option("--seed", t.seed, "Seed for initialization and batch order");
    tr->add_option("--huber-delta", t.huber_delta, "Huber threshold");
    tr->add_flag("--robust", t.robust, "Train on adversarially perturbed inputs");
    tr->add_option("--gamma", t.gamma, "Transport cost weight");
    tr->add_option("--eta", t.eta, "Ascent step");
    tr->add_option("--rho", t.rho, "Ball radius");
    tr->add_option("--steps", t.steps, "Ascent steps");
    tr->add_flag("--normalize", t.normalize, "Normalize each ascent direction");

    EvalArgs e;
    auto* ev = app.add_subcommand("eval", "Evaluate checkpoints and solvers on the test split");
    ev->add_option("--data", e.data_path, "Dataset file")->required();
    ev->add_option("--case", e.case_path, "Case file (needed for residuals and solvers)");
    ev->add_option("--checkpoint", e.checkpoints, "Checkpoint file (repeatable)");
    ev->add_option("--solver", e.solvers, "Classical solver: gn (repeatable)");
    ev->add_option("--max-iterations", e.max_iterations, "Solver iteration cap");
    ev->add_option("--huber-delta", e.huber_delta, "Huber threshold");
    ev->add_option("--out-dir", e.out_dir, "Directory for metrics and plot data")->required();

    AttackArgs k;
    auto* at = app.add_subcommand("attack-eval", "Evaluate a checkpoint on adversarially perturbed test inputs");
    at->add_option("--data", k.data_path, "Dataset file")->required();
    at->add_option("--checkpoint", k.checkpoint, "Checkpoint to attack")->required();
    at->add_option("--compare", k.compare, "Second checkpoint evaluated on the same attacked inputs");
    at->add_option("--case", k.case_path, "Case file (enables residuals)");
    at->add_option("--config", k.config, "JSON config file");
    at->add_option("--gamma", k.gamma, "Transport cost weight");
    at->add_option("--eta", k.eta, "Ascent step");
    at->add_option("--rho", k.rho, "Ball radius");
    at->add_option("--steps", k.steps, "Ascent steps");
    at->add_flag("--normalize", k.normalize, "Normalize each ascent direction");
    at->add_option("--huber-delta", k.huber_delta, "Huber threshold");
    at->add_option("--out-dir", k.out_dir, "Directory for reports")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (CLI::CallForHelp const&) {
        out << app.help();
        return 0;
    } catch (CLI::ParseError const& ex) {
        err << "error: " << ex.what() << '\n';
        return 2;
    }

    try {
        if (*gen) return gen_data(g, out, err);
        if (*tr) return train_cmd(t, out, err);
        if (*ev) return eval_cmd(e, out, err);
        if (*at) return attack_cmd(k, out, err);
    } catch (NumericalError const& ex) {
        err << "error: " << ex.what() << '\n';
        return 1;
    } catch (Error const& ex) {
        err << "error: " << ex.what() << '\n';
        return 2;
    } catch (std::filesystem::filesystem_error const& ex) {
        err << "error: " << ex.what() << '\n';
        return 2;
    } catch (std::exception const& ex) {
        err << "error: " << ex.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace psse::cli
