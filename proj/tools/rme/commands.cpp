// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <boost/algorithm/string.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "rme/dataset_io.hpp"
#include "rme/evaluation.hpp"
#include "rme/grid.hpp"
#include "rme/parallel.hpp"
#include "rme/sampling.hpp"
#include "rme/synthgen.hpp"

namespace fs = std::filesystem;

namespace rme::cli {

namespace {

constexpr std::uint64_t kInstanceStream = 1;
constexpr std::uint64_t kSplitStream = 2;
constexpr std::uint64_t kInitStream = 3;
constexpr std::uint64_t kAdamStream = 4;

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

std::size_t get_count(const Config& cfg, const std::string& key, long long fallback) {
    const auto v = cfg.get_int(key, fallback);
    if (v < 0) throw CliError(fmt::format("{} must not be negative", key));
    return static_cast<std::size_t>(v);
}

std::vector<MeasurementSet> load_sets(const RunContext& ctx, const std::string& key) {
    const auto files = ctx.config.get_string_list(key, {});
    if (files.empty()) throw CliError(fmt::format("config key '{}' lists no dataset files", key));
    std::vector<MeasurementSet> sets;
    for (const auto& f : files) {
        const auto path = resolve(ctx.config_dir, f);
        if (!fs::exists(path)) throw CliError(fmt::format("dataset '{}' does not exist", path.string()));
        sets.push_back(read_dataset(path).set);
    }
    return sets;
}

double patch_side(const Config& cfg) { return cfg.get_double("patch.side_m", 19.2); }
double patch_spacing(const Config& cfg) { return cfg.get_double("patch.spacing_m", 1.2); }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw CliError(fmt::format("cannot write '{}'", path.string()));
    f << text;
    if (!f) throw CliError(fmt::format("write to '{}' failed", path.string()));
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw CliError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
}

NobsRange nobs_range(const Config& cfg) {
    NobsRange r{get_count(cfg, "train.n_obs_lo", 10), get_count(cfg, "train.n_obs_hi", 100)};
    if (r.lo < 1 || r.lo > r.hi) throw CliError("train.n_obs_lo must be in [1, train.n_obs_hi]");
    return r;
}

std::vector<std::size_t> to_counts(const std::vector<double>& v, const std::string& key) {
    std::vector<std::size_t> out;
    for (const double x : v) {
        if (!(x >= 1.0) || x != std::floor(x)) throw CliError(fmt::format("{} needs positive integers", key));
        out.push_back(static_cast<std::size_t>(x));
    }
    return out;
}

}  // namespace

// --- params files ----------------------------------------------------------

void put_knn(Config& cfg, const KnnParams& p) { cfg.set("knn.k", static_cast<long long>(p.k)); }

void put_kriging(Config& cfg, const KrigingParams& p) {
    cfg.set("kriging.shadow_variance", p.shadow_variance);
    cfg.set("kriging.shadow_half_distance", p.shadow_half_distance);
    cfg.set("kriging.noise_variance", p.noise_variance);
}

void put_krr(Config& cfg, const KrrParams& p) {
    cfg.set("krr.regularization", p.regularization);
    cfg.set("krr.kernel", std::string(to_string(p.kernel)));
    cfg.set("krr.width", p.width);
}

KnnParams get_knn(const Config& cfg) { return {get_count(cfg, "knn.k", 5)}; }

KrigingParams get_kriging(const Config& cfg) {
    KrigingParams p;
    p.shadow_variance = cfg.get_double("kriging.shadow_variance");
    p.shadow_half_distance = cfg.get_double("kriging.shadow_half_distance");
    p.noise_variance = cfg.get_double("kriging.noise_variance", p.noise_variance);
    return p;
}

KrrParams get_krr(const Config& cfg) {
    KrrParams p;
    p.regularization = cfg.get_double("krr.regularization");
    p.kernel = kernel_kind_from_string(cfg.get_string("krr.kernel"));
    p.width = cfg.get_double("krr.width");
    return p;
}

TraditionalParams get_traditional(const Config& cfg, const std::string& what) {
    for (const char* k : {"knn.k", "kriging.shadow_variance", "krr.regularization"})
        if (!cfg.has(k)) throw CliError(fmt::format("{} lacks '{}'; train the traditional estimators first", what, k));
    return {get_knn(cfg), get_kriging(cfg), get_krr(cfg)};
}

std::unique_ptr<Estimator> load_estimator(const std::string& id, const fs::path& params_path) {
    if (params_path.empty()) throw CliError("no params file given for the estimator");
    if (!fs::exists(params_path)) throw CliError(fmt::format("params file '{}' does not exist", params_path.string()));
    const auto cfg = Config::load(params_path);
    const auto need = [&](const char* key) {
        if (!cfg.has(key)) throw CliError(fmt::format("params file '{}' lacks '{}'", params_path.string(), key));
    };
    if (id == "knn") {
        need("knn.k");
        return std::make_unique<KnnEstimator>(get_knn(cfg));
    }
    if (id == "kriging") {
        need("kriging.shadow_variance");
        return std::make_unique<KrigingEstimator>(get_kriging(cfg));
    }
    if (id == "krr") {
        need("krr.regularization");
        return std::make_unique<KrrEstimator>(get_krr(cfg));
    }
    if (id == "cnn" || id == "frade") {
        const auto key = id + ".weights";
        need(key.c_str());
        const auto weights = NetworkWeights::load(resolve(params_path.parent_path(), cfg.get_string(key)));
        if (id == "cnn") return std::make_unique<NetworkEstimator>(weights);
        return std::make_unique<FradeEstimator>(get_traditional(cfg, params_path.string()), weights);
    }
    throw CliError(fmt::format("unknown estimator '{}'", id));
}

SearchGrid search_grid_from_config(const Config& cfg) {
    auto g = SearchGrid::defaults();
    if (cfg.has("search.knn_k")) g.knn_k = to_counts(cfg.get_list("search.knn_k"), "search.knn_k");
    g.kriging_var = cfg.get_list("search.kriging_var", g.kriging_var);
    g.kriging_halfdist = cfg.get_list("search.kriging_halfdist", g.kriging_halfdist);
    g.kriging_noise_var = cfg.get_double("search.kriging_noise_var", g.kriging_noise_var);
    g.krr_reg = cfg.get_list("search.krr_reg", g.krr_reg);
    if (cfg.has("search.krr_kernels")) {
        g.krr_kernels.clear();
        for (const auto& k : cfg.get_string_list("search.krr_kernels")) g.krr_kernels.push_back(kernel_kind_from_string(k));
    }
    g.krr_widths = cfg.get_list("search.krr_widths", g.krr_widths);
    g.validate();
    return g;
}

// --- generate --------------------------------------------------------------

std::vector<fs::path> cmd_generate(const RunContext& ctx, std::ostream& log) {
    const auto& cfg = ctx.config;
    const auto count = get_count(cfg, "generate.count", 1);
    const Region region{cfg.get_double("generate.region_x_m", 54.0), cfg.get_double("generate.region_y_m", 54.0)};
    const double line = cfg.get_double("generate.line_spacing_m", 1.2);
    const double along = cfg.get_double("generate.along_spacing_m", 0.27);
    const double grid_spacing = cfg.get_double("generate.grid_spacing_m", 1.2);
    auto prop = propagation_from_config(cfg, "generate");
    const auto locations = lawnmower_locations(region, line, along);

    ensure_dir(ctx.out);
    std::vector<fs::path> written;
    for (std::size_t k = 0; k < count; ++k) {
        prop.seed = child_seed(ctx.seed, k);
        const auto set = sample_measurements(generate_map(region, prop), locations);
        const auto path = ctx.out / fmt::format("set_{:03}.csv", k);
        write_dataset(path, set, grid_spacing);
        fmt::print(log, "wrote {} ({} measurements)\n", path.string(), set.size());
        written.push_back(path);
    }
    return written;
}

// --- quantize --------------------------------------------------------------

std::vector<fs::path> cmd_quantize(const RunContext& ctx, std::ostream& log) {
    const auto& cfg = ctx.config;
    const auto files = cfg.get_string_list("data.input", {});
    if (files.empty()) throw CliError("config key 'data.input' lists no dataset files");
    const auto mode = combining_mode_from_string(cfg.get_string("quantize.mode", "db_mean"));
    ensure_dir(ctx.out);
    std::vector<fs::path> written;
    for (const auto& f : files) {
        const auto path = resolve(ctx.config_dir, f);
        if (!fs::exists(path)) throw CliError(fmt::format("dataset '{}' does not exist", path.string()));
        const auto data = read_dataset(path);
        const double spacing = cfg.get_double("quantize.spacing_m", data.grid_spacing > 0.0 ? data.grid_spacing : 1.2);
        const auto [nx, ny] = region_grid_size(data.set.region(), spacing);
        const GridSpec spec{ny, nx, spacing, {0.0, 0.0}};
        const auto grid = quantize(data.set.measurements(), spec, mode);

        std::ostringstream text;
        text << "row,col,x_m,y_m,power_db\n";
        for (std::size_t i = 1; i <= spec.n_rows; ++i)
            for (std::size_t j = 1; j <= spec.n_cols; ++j) {
                const auto r = static_cast<Eigen::Index>(i - 1), c = static_cast<Eigen::Index>(j - 1);
                if (grid.mask(r, c) == 0) continue;
                const auto x = grid_point_location(spec, i, j);
                fmt::print(text, "{},{},{:.9g},{:.9g},{:.6g}\n", i, j, x.x, x.y, grid.values(r, c));
            }
        const auto out = ctx.out / (path.stem().string() + "_grid.csv");
        write_text(out, text.str());
        fmt::print(log, "wrote {} ({} of {} grid points occupied)\n", out.string(), grid.occupied_count(), spec.size());
        written.push_back(out);
    }
    return written;
}

// --- train -----------------------------------------------------------------

fs::path cmd_train(const RunContext& ctx, const std::string& estimator, std::ostream& log) {
    const auto& cfg = ctx.config;
    static const std::vector<std::string> known{"knn", "kriging", "krr", "traditional", "cnn", "frade"};
    if (std::find(known.begin(), known.end(), estimator) == known.end())
        throw CliError(fmt::format("unknown estimator '{}'", estimator));

    // FRADE needs its point estimators before any heavy work starts.
    TraditionalParams traditional;
    if (estimator == "frade") {
        if (!cfg.has("train.traditional_params"))
            throw CliError("frade training needs train.traditional_params (run `train --estimator traditional`)");
        const auto p = resolve(ctx.config_dir, cfg.get_string("train.traditional_params"));
        if (!fs::exists(p)) throw CliError(fmt::format("traditional params '{}' do not exist", p.string()));
        traditional = get_traditional(Config::load(p), p.string());
    }

    const auto sets = load_sets(ctx, "data.train");
    const double side = patch_side(cfg);
    const double spacing = patch_spacing(cfg);
    Rng rng = child_rng(ctx.seed, kInstanceStream);
    const auto instances = sample_instances(sets, get_count(cfg, "train.instances", 200), side, spacing, rng);
    const auto range = nobs_range(cfg);

    ensure_dir(ctx.out);
    Config params;
    const auto params_path = ctx.out / (estimator + ".params");

    if (estimator == "knn" || estimator == "kriging" || estimator == "krr" || estimator == "traditional") {
        TraditionalTrainingConfig tcfg;
        tcfg.n_obs = range;
        tcfg.splits = get_count(cfg, "train.splits", 200);
        tcfg.seed = child_seed(ctx.seed, kSplitStream);
        tcfg.threads = ctx.threads;
        const bool all = estimator == "traditional";
        tcfg.estimators = {all || estimator == "knn", all || estimator == "kriging", all || estimator == "krr"};
        const auto r = train_traditional(instances, search_grid_from_config(cfg), tcfg);
        if (tcfg.estimators.knn) {
            put_knn(params, r.knn);
            fmt::print(log, "knn: k = {} (training RMSE {:.6g} dB)\n", r.knn.k, r.knn_rmse);
        }
        if (tcfg.estimators.kriging) {
            put_kriging(params, r.kriging);
            fmt::print(log, "kriging: variance = {}, half distance = {} m (training RMSE {:.6g} dB)\n",
                       r.kriging.shadow_variance, r.kriging.shadow_half_distance, r.kriging_rmse);
        }
        if (tcfg.estimators.krr) {
            put_krr(params, r.krr);
            fmt::print(log, "krr: lambda = {}, {} kernel, width = {} (training RMSE {:.6g} dB)\n",
                       r.krr.regularization, to_string(r.krr.kernel), r.krr.width, r.krr_rmse);
        }
        params.save(params_path);
        fmt::print(log, "wrote {}\n", params_path.string());
        return params_path;
    }

    const auto kind = estimator == "cnn" ? NetworkKind::Cnn : NetworkKind::Frade;
    const auto copies = get_count(cfg, "train.copies", 5);
    std::vector<TrainingExample> examples;
    for (const auto& inst : instances) {
        const auto spec = patch_grid_spec(inst.patch.corner, side, spacing);
        auto ex = make_training_examples(inst, spec, range, copies, rng);
        std::move(ex.begin(), ex.end(), std::back_inserter(examples));
    }
    const auto samples = build_network_samples(examples, kind, traditional, ctx.threads);

    AdamConfig adam;
    adam.learning_rate = cfg.get_double("train.learning_rate", adam.learning_rate);
    adam.batch_size = get_count(cfg, "train.batch_size", static_cast<long long>(adam.batch_size));
    adam.epochs = get_count(cfg, "train.epochs", static_cast<long long>(adam.epochs));
    adam.validation_fraction = cfg.get_double("train.validation_fraction", adam.validation_fraction);
    adam.seed = child_seed(ctx.seed, kAdamStream);
    adam.threads = ctx.threads;

    NetworkWeights init = cfg.has("train.init_weights")
                              ? NetworkWeights::load(resolve(ctx.config_dir, cfg.get_string("train.init_weights")))
                              : NetworkWeights::random(input_channels(kind), child_seed(ctx.seed, kInitStream));
    const auto result = train_network(samples, std::move(init), adam);

    const auto weights_name = estimator + ".weights";
    result.weights.save(ctx.out / weights_name);
    std::ostringstream csv;
    csv << "epoch,loss\n";
    for (std::size_t e = 0; e < result.history.size(); ++e) fmt::print(csv, "{},{:.6g}\n", e + 1, result.history[e]);
    const auto log_path = ctx.out / (estimator + "_training_log.csv");
    write_text(log_path, csv.str());

    params.set(estimator + ".weights", weights_name);
    if (kind == NetworkKind::Frade) {
        put_knn(params, traditional.knn);
        put_kriging(params, traditional.kriging);
        put_krr(params, traditional.krr);
    }
    params.save(params_path);
    fmt::print(log, "{}: {} samples, initial loss {:.6g}, final loss {:.6g}, kept epoch {}\n", estimator,
               samples.size(), result.initial_loss,
               result.history.empty() ? result.initial_loss : result.history.back(), result.best_epoch);
    fmt::print(log, "wrote {}, {} and {}\n", params_path.string(), (ctx.out / weights_name).string(),
               log_path.string());
    return params_path;
}

// --- evaluate --------------------------------------------------------------

fs::path cmd_evaluate(const RunContext& ctx, const std::string& estimator_arg, bool check_seed, std::ostream& log) {
    const auto& cfg = ctx.config;
    const auto id = estimator_arg.empty() ? cfg.get_string("estimator.id", "") : estimator_arg;
    if (id.empty()) throw CliError("no estimator selected (use --estimator or estimator.id)");
    if (!cfg.has("estimator.params")) throw CliError("config key 'estimator.params' is missing");
    const auto estimator = load_estimator(id, resolve(ctx.config_dir, cfg.get_string("estimator.params")));
    const auto sets = load_sets(ctx, "data.test");

    SweepConfig sweep;
    sweep.side = patch_side(cfg);
    sweep.spacing = patch_spacing(cfg);
    sweep.metrics.clear();
    for (const auto& m : cfg.get_string_list("evaluate.metrics", {"rmse"})) sweep.metrics.push_back(metric_kind_from_string(m));
    sweep.n_obs = to_counts(cfg.get_list("evaluate.n_obs", {10.0}), "evaluate.n_obs");
    sweep.iterations = get_count(cfg, "evaluate.iterations", 100);
    sweep.mode = combining_mode_from_string(cfg.get_string("evaluate.mode", "db_mean"));
    sweep.seed = ctx.seed;
    sweep.threads = ctx.threads;

    const auto render = [&] {
        std::ostringstream s;
        write_report_csv(s, run_sweep(sets, *estimator, sweep));
        return s.str();
    };
    const auto text = render();
    if (check_seed && render() != text) throw CliError("rerun with the same seed produced a different report");

    ensure_dir(ctx.out);
    const auto path = ctx.out / "report.csv";
    write_text(path, text);
    fmt::print(log, "wrote {}{}\n", path.string(), check_seed ? " (seed check passed)" : "");
    return path;
}

// --- report ----------------------------------------------------------------

std::vector<fs::path> cmd_report(const RunContext& ctx, const std::vector<fs::path>& inputs, std::ostream& log) {
    if (inputs.empty()) throw CliError("report needs at least one report CSV");
    std::ostringstream merged;
    merged << "source," << kReportHeader << '\n';
    struct Best {
        double error;
        std::string row;
    };
    std::map<std::string, Best> best;  // metric -> lowest mean error
    std::size_t rows = 0;
    for (const auto& in : inputs) {
        std::ifstream f(in);
        if (!f) throw CliError(fmt::format("cannot read '{}'", in.string()));
        std::string line;
        if (!std::getline(f, line) || line.rfind(kReportHeader, 0) != 0)
            throw CliError(fmt::format("'{}' is not a report CSV", in.string()));
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            std::vector<std::string> cols;
            boost::split(cols, line, boost::is_any_of(","));
            if (cols.size() < 7) throw CliError(fmt::format("short row in '{}': {}", in.string(), line));
            const std::string base = boost::join(std::vector<std::string>(cols.begin(), cols.begin() + 7), ",");
            merged << in.filename().string() << ',' << base << '\n';
            const double err = std::stod(cols[4]);
            auto it = best.find(cols[1]);
            if (it == best.end() || err < it->second.error) best[cols[1]] = {err, base};
            ++rows;
        }
    }
    if (rows == 0) throw CliError("the given reports contain no rows");

    std::ostringstream summary;
    fmt::print(summary, "{:<16} {:<10} {:>6} {:>12}\n", "metric", "estimator", "n_obs", "min_error_db");
    for (const auto& [metric, b] : best) {
        std::vector<std::string> cols;
        boost::split(cols, b.row, boost::is_any_of(","));
        fmt::print(summary, "{:<16} {:<10} {:>6} {:>12.6g}\n", metric, cols[0], cols[2], b.error);
    }

    ensure_dir(ctx.out);
    const auto long_path = ctx.out / "report_long.csv";
    const auto summary_path = ctx.out / "summary.txt";
    write_text(long_path, merged.str());
    write_text(summary_path, summary.str());
    log << summary.str();
    return {long_path, summary_path};
}

// --- entry point -----------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Radio map estimation toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::optional<std::size_t> threads;
    app.add_option("--config", config_path, "Config file (key = value with [sections])");
    app.add_option("--seed", seed, "Master seed (overrides the config 'seed' key)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--threads", threads, "Worker threads (fallback: RME_THREADS, then 1)");

    auto* generate = app.add_subcommand("generate", "Synthesize measurement sets");
    auto* quantize_cmd = app.add_subcommand("quantize", "Quantize datasets onto their region grid");
    auto* train = app.add_subcommand("train", "Train an estimator");
    std::string train_estimator;
    train->add_option("--estimator", train_estimator, "knn | kriging | krr | traditional | cnn | frade")->required();
    auto* evaluate = app.add_subcommand("evaluate", "Monte Carlo evaluation");
    std::string eval_estimator;
    bool check_seed = false;
    evaluate->add_option("--estimator", eval_estimator, "Overrides estimator.id");
    evaluate->add_flag("--check-seed", check_seed, "Run twice and require identical reports");
    auto* report = app.add_subcommand("report", "Merge report CSVs");
    std::vector<std::string> report_inputs;
    report->add_option("inputs", report_inputs, "Report CSV files");

    // CLI11 wants argv order reversed for the vector overload.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        RunContext ctx;
        if (!config_path.empty()) {
            if (!fs::exists(config_path)) throw CliError(fmt::format("config '{}' does not exist", config_path));
            ctx.config = Config::load(config_path);
            ctx.config_dir = fs::path(config_path).parent_path();
            if (ctx.config_dir.empty()) ctx.config_dir = ".";
        }
        ctx.seed = seed ? *seed : static_cast<std::uint64_t>(ctx.config.get_int("seed", 1));
        ctx.out = out_dir;
        if (threads) {
            ctx.threads = std::max<std::size_t>(1, *threads);
        } else {
            ctx.threads = default_thread_count();
        }

        if (generate->parsed()) cmd_generate(ctx, out);
        else if (quantize_cmd->parsed()) cmd_quantize(ctx, out);
        else if (train->parsed()) cmd_train(ctx, train_estimator, out);
        else if (evaluate->parsed()) cmd_evaluate(ctx, eval_estimator, check_seed, out);
        else if (report->parsed()) cmd_report(ctx, {report_inputs.begin(), report_inputs.end()}, out);
        return 0;
    } catch (const std::exception& e) {
        fmt::print(err, "rme: error: {}\n", e.what());
        return 1;
    }
}

}  // namespace rme::cli
