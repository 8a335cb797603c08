// SPDX-License-Identifier: Apache-2.0

#include "rme/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "rme/grid.hpp"
#include "rme/parallel.hpp"
#include "rme/sampling.hpp"
#include "rme/training.hpp"

namespace rme {

std::string_view to_string(MetricKind kind) {
    switch (kind) {
        case MetricKind::Rmse: return "rmse";
        case MetricKind::RmseG: return "rmse_g";
        case MetricKind::RmseGridNobs: return "rmse_grid_nobs";
        case MetricKind::RmseGridAll: return "rmse_grid_all";
    }
    return "unknown";
}

MetricKind metric_kind_from_string(std::string_view name) {
    for (auto k : {MetricKind::Rmse, MetricKind::RmseG, MetricKind::RmseGridNobs, MetricKind::RmseGridAll})
        if (to_string(k) == name) return k;
    throw std::invalid_argument(fmt::format("unknown metric '{}'", name));
}

bool is_grid_metric(MetricKind kind) {
    return kind == MetricKind::RmseGridNobs || kind == MetricKind::RmseGridAll;
}

double normalized_density(std::size_t n_obs, double wavelength, double side) {
    return static_cast<double>(n_obs) * wavelength * wavelength / (side * side);
}

std::size_t n_obs_for_density(double density, double wavelength, double side) {
    const double n = std::round(density * side * side / (wavelength * wavelength));
    return static_cast<std::size_t>(std::max(1.0, n));
}

double mean_squared_error(std::span<const double> estimates, std::span<const double> truths) {
    if (estimates.size() != truths.size())
        throw std::invalid_argument("estimate and truth counts differ");
    if (estimates.empty()) throw std::invalid_argument("no unobserved entries to score");
    double s = 0.0;
    for (std::size_t n = 0; n < estimates.size(); ++n) {
        const double e = truths[n] - estimates[n];
        s += e * e;
    }
    return s / static_cast<double>(estimates.size());
}

double rmse_from_mses(std::span<const double> iteration_mses) {
    if (iteration_mses.empty()) throw std::invalid_argument("no iterations");
    return std::sqrt(std::accumulate(iteration_mses.begin(), iteration_mses.end(), 0.0) /
                     static_cast<double>(iteration_mses.size()));
}

double rmse_std_error(std::span<const double> iteration_mses) {
    const std::size_t n = iteration_mses.size();
    if (n < 2) return 0.0;
    const double rmse = rmse_from_mses(iteration_mses);
    if (rmse == 0.0) return 0.0;
    const double mean = rmse * rmse;
    double ss = 0.0;
    for (const double m : iteration_mses) ss += (m - mean) * (m - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    return sd / std::sqrt(static_cast<double>(n)) / (2.0 * rmse);
}

double metric_rmse(const std::vector<std::vector<double>>& estimates,
                   const std::vector<std::vector<double>>& truths) {
    if (estimates.size() != truths.size()) throw std::invalid_argument("iteration counts differ");
    std::vector<double> mses;
    mses.reserve(estimates.size());
    for (std::size_t i = 0; i < estimates.size(); ++i) mses.push_back(mean_squared_error(estimates[i], truths[i]));
    return rmse_from_mses(mses);
}

double grid_mse(MetricKind kind, const Matrix& estimate, const QuantizedGrid& full,
                const ObservationSplit& split) {
    if (!is_grid_metric(kind)) throw std::invalid_argument("grid_mse needs a grid metric");
    if (estimate.rows() != full.values.rows() || estimate.cols() != full.values.cols())
        throw std::invalid_argument("estimate shape does not match the grid");
    std::vector<std::size_t> scored;
    if (kind == MetricKind::RmseGridNobs) {
        scored = split.nobs;
    } else {
        scored = split.obs;
        scored.insert(scored.end(), split.nobs.begin(), split.nobs.end());
    }
    if (scored.empty()) throw std::invalid_argument("no grid entries to score");
    const auto cols = static_cast<std::size_t>(full.values.cols());
    std::vector<double> est, truth;
    for (const auto flat : scored) {
        const auto r = static_cast<Eigen::Index>(flat / cols);
        const auto c = static_cast<Eigen::Index>(flat % cols);
        if (full.mask(r, c) == 0) throw std::invalid_argument("split contains an unoccupied entry");
        est.push_back(estimate(r, c));
        truth.push_back(full.values(r, c));
    }
    return mean_squared_error(est, truth);
}

double metric_grid(MetricKind kind, const Matrix& estimate, const QuantizedGrid& full,
                   const ObservationSplit& split) {
    return std::sqrt(grid_mse(kind, estimate, full, split));
}

double evaluate_iteration(std::span<const MeasurementSet> sets, const Estimator& estimator,
                          MetricKind kind, std::size_t n_obs, const SweepConfig& cfg, Rng& rng) {
    if (sets.empty()) throw std::invalid_argument("no measurement sets to evaluate on");
    if (n_obs < 1) throw std::invalid_argument("n_obs must be at least 1");
    const auto& set = sets[uniform_int<std::size_t>(rng, 0, sets.size() - 1)];

    for (std::size_t attempt = 0; attempt < cfg.max_patch_attempts; ++attempt) {
        const auto instance = sample_patch(set, cfg.side, cfg.spacing, rng, cfg.max_patch_attempts);
        const auto spec = patch_grid_spec(instance.patch.corner, cfg.side, cfg.spacing);
        const auto& all = instance.measurements;

        if (!is_grid_metric(kind)) {
            ObservationSplit split;
            if (kind == MetricKind::Rmse) {
                if (all.size() <= n_obs) continue;
                split = split_uniform(all.size(), n_obs, rng);
            } else {
                const auto occupied = quantize(instance, spec, cfg.mode).occupied_count();
                if (occupied <= n_obs) continue;
                split = split_clustered(instance, spec, n_obs, rng);
            }
            ObservedData data;
            data.raw = select(all, split.obs);
            data.grid = quantize(data.raw, spec, cfg.mode);
            const auto estimate = estimator.estimate(data);
            std::vector<double> est, truth;
            est.reserve(split.nobs.size());
            truth.reserve(split.nobs.size());
            for (const auto n : split.nobs) {
                est.push_back(estimate.evaluate(all[n].loc));
                truth.push_back(all[n].power_db);
            }
            return mean_squared_error(est, truth);
        }

        const auto full = quantize(instance, spec, cfg.mode);
        const auto occupied = occupied_entries(full);
        if (occupied.size() < n_obs || (kind == MetricKind::RmseGridNobs && occupied.size() == n_obs))
            continue;
        const auto split = split_entries(occupied, n_obs, rng);
        ObservedData data;
        data.grid = restrict_grid(full, split.obs);
        data.grid_aware = true;
        const auto cells = assign_to_grid(all, spec);
        for (std::size_t n = 0; n < all.size(); ++n)
            if (std::binary_search(split.obs.begin(), split.obs.end(), cells[n])) data.raw.push_back(all[n]);
        const auto estimate = estimator.estimate(data);
        return grid_mse(kind, estimate.on_grid(spec), full, split);
    }
    throw std::runtime_error(fmt::format(
        "no patch with enough measurements for n_obs = {} ({}) after {} attempts", n_obs,
        to_string(kind), cfg.max_patch_attempts));
}

std::vector<MetricReport> run_sweep(std::span<const MeasurementSet> test_sets,
                                    const Estimator& estimator, const SweepConfig& cfg) {
    if (cfg.iterations < 1) throw std::invalid_argument("iterations must be at least 1");
    if (test_sets.empty()) throw std::invalid_argument("no test sets");
    std::vector<MetricReport> reports;
    for (const auto kind : cfg.metrics) {
        for (const auto n_obs : cfg.n_obs) {
            const std::uint64_t stream =
                child_seed(child_seed(cfg.seed, static_cast<std::uint64_t>(kind)), n_obs);
            std::vector<double> mses(cfg.iterations);
            parallel_for(
                cfg.iterations,
                [&](std::size_t i) {
                    Rng rng = child_rng(stream, i);
                    mses[i] = evaluate_iteration(test_sets, estimator, kind, n_obs, cfg, rng);
                },
                cfg.threads);
            MetricReport r;
            r.estimator = estimator.id();
            r.metric = kind;
            r.n_obs = n_obs;
            r.normalized_density = normalized_density(n_obs, test_sets.front().wavelength(), cfg.side);
            r.mean_error_db = rmse_from_mses(mses);
            r.std_error_db = rmse_std_error(mses);
            r.iterations = cfg.iterations;
            reports.push_back(r);
        }
    }
    return reports;
}

MeasurementSet synthesize_set(const PropagationConfig& cfg, const SurveyConfig& survey) {
    const auto map = generate_map(survey.region, cfg);
    return sample_measurements(map, lawnmower_locations(survey.region, survey.line_spacing,
                                                        survey.along_spacing));
}

std::vector<DistancePoint> distance_sweep(const Estimator& estimator, const DistanceSweepConfig& cfg) {
    std::vector<DistancePoint> out;
    const Location center{cfg.survey.region.size_x / 2.0, cfg.survey.region.size_y / 2.0};
    for (std::size_t k = 0; k < cfg.distances.size(); ++k) {
        const double d = cfg.distances[k];
        if (!(d > 0.0)) throw std::invalid_argument("transmitter distances must be positive");
        PropagationConfig prop = cfg.propagation;
        prop.tx_location = {center.x + d, center.y};
        prop.seed = child_seed(cfg.seed, k);
        const std::vector<MeasurementSet> sets{synthesize_set(prop, cfg.survey)};

        SweepConfig sweep;
        sweep.side = cfg.side;
        sweep.spacing = cfg.spacing;
        sweep.metrics = {MetricKind::Rmse};
        sweep.n_obs = {n_obs_for_density(cfg.density, prop.wavelength, cfg.side)};
        sweep.iterations = cfg.iterations;
        sweep.seed = child_seed(cfg.seed, 1000 + k);
        sweep.threads = cfg.threads;
        out.push_back({d, run_sweep(sets, estimator, sweep).front()});
    }
    return out;
}

std::vector<ScenarioPoint> scenario_sweep(const SearchGrid& search, const ScenarioSweepConfig& cfg) {
    if (cfg.scenarios.empty()) throw std::invalid_argument("scenario sweep needs at least one scenario");
    std::vector<ScenarioPoint> out;
    for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
        const auto& scenario = cfg.scenarios[s];
        const std::uint64_t scenario_seed = child_seed(cfg.seed, s);
        std::vector<MeasurementSet> train, test;
        for (std::size_t t = 0; t < cfg.train_sets + cfg.test_sets; ++t) {
            PropagationConfig prop = scenario.propagation;
            prop.seed = child_seed(scenario_seed, t);
            (t < cfg.train_sets ? train : test).push_back(synthesize_set(prop, cfg.survey));
        }

        for (std::size_t d = 0; d < cfg.densities.size(); ++d) {
            const double density = cfg.densities[d];
            const double wavelength = scenario.propagation.wavelength;
            const std::size_t n_obs = n_obs_for_density(density, wavelength, cfg.side);

            Rng rng = child_rng(scenario_seed, 5000 + d);
            const auto instances = sample_instances(train, cfg.train_instances, cfg.side, cfg.spacing, rng);
            TraditionalTrainingConfig tcfg;
            tcfg.n_obs = {n_obs, n_obs};
            tcfg.splits = cfg.training_splits;
            tcfg.seed = child_seed(scenario_seed, 6000 + d);
            tcfg.threads = cfg.threads;
            tcfg.estimators = {false, true, false};
            const auto trained = train_traditional(instances, search, tcfg);

            SweepConfig sweep;
            sweep.side = cfg.side;
            sweep.spacing = cfg.spacing;
            sweep.metrics = {MetricKind::Rmse};
            sweep.n_obs = {n_obs};
            sweep.iterations = cfg.iterations;
            sweep.seed = child_seed(scenario_seed, 7000 + d);
            sweep.threads = cfg.threads;
            const KrigingEstimator kriging(trained.kriging);
            auto report = run_sweep(test, kriging, sweep).front();
            out.push_back({scenario.name, density, trained.kriging, report});
        }
    }
    return out;
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("need two equal-length series");
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

std::string format_report_row(const MetricReport& r) {
    return fmt::format("{},{},{},{:.6g},{:.6g},{:.6g},{}", r.estimator, to_string(r.metric), r.n_obs,
                       r.normalized_density, r.mean_error_db, r.std_error_db, r.iterations);
}

void write_report_csv(std::ostream& out, std::span<const MetricReport> reports) {
    out << kReportHeader << '\n';
    for (const auto& r : reports) out << format_report_row(r) << '\n';
}

void write_distance_csv(std::ostream& out, std::span<const DistancePoint> points) {
    out << kReportHeader << ",distance_m\n";
    for (const auto& p : points) fmt::print(out, "{},{:.6g}\n", format_report_row(p.report), p.distance_m);
}

void write_scenario_csv(std::ostream& out, std::span<const ScenarioPoint> points) {
    out << kReportHeader << ",scenario\n";
    for (const auto& p : points) fmt::print(out, "{},{}\n", format_report_row(p.report), p.scenario);
}

}  // namespace rme
