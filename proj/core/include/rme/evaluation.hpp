// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo evaluation: the four RMSE metrics and the structured sweeps
// (N_obs sweep, transmitter distance sweep, propagation scenario sweep).

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rme/estimator.hpp"
#include "rme/random.hpp"
#include "rme/synthgen.hpp"
#include "rme/traditional.hpp"
#include "rme/types.hpp"

namespace rme {

struct SearchGrid;

/// Rmse: uniform split of measurements, scored at unobserved measurements.
/// RmseG: clustered split (whole grid cells observed), scored likewise.
/// RmseGridNobs / RmseGridAll: split of occupied grid entries, scored against
/// the quantized values at unobserved / all occupied entries.
enum class MetricKind { Rmse, RmseG, RmseGridNobs, RmseGridAll };

std::string_view to_string(MetricKind kind);
MetricKind metric_kind_from_string(std::string_view name);
bool is_grid_metric(MetricKind kind);

struct MetricReport {
    std::string estimator;
    MetricKind metric = MetricKind::Rmse;
    std::size_t n_obs = 0;
    double normalized_density = 0.0;
    double mean_error_db = 0.0;
    double std_error_db = 0.0;
    std::size_t iterations = 0;
};

/// n_obs * wavelength^2 / side^2.
double normalized_density(std::size_t n_obs, double wavelength, double side);

/// Observation count closest to `density` (at least 1).
std::size_t n_obs_for_density(double density, double wavelength, double side);

/// Mean of |truth - estimate|^2. Throws std::invalid_argument when empty or
/// sizes differ.
double mean_squared_error(std::span<const double> estimates, std::span<const double> truths);

/// sqrt(mean of per-iteration mean squared errors).
double rmse_from_mses(std::span<const double> iteration_mses);

/// Standard error of rmse_from_mses by the delta method:
/// sd(mse) / sqrt(I) / (2 RMSE). Zero for a single iteration or zero RMSE.
double rmse_std_error(std::span<const double> iteration_mses);

/// Grid-agnostic RMSE over iterations: estimates[i] and truths[i] hold the
/// values at the unobserved locations of iteration i.
double metric_rmse(const std::vector<std::vector<double>>& estimates,
                   const std::vector<std::vector<double>>& truths);

/// Per-iteration mean squared error of a grid estimate. `split` partitions the
/// occupied flat entries of `full`; GridNobs scores split.nobs, GridAll scores
/// every occupied entry.
double grid_mse(MetricKind kind, const Matrix& estimate, const QuantizedGrid& full,
                const ObservationSplit& split);

/// Single-iteration grid metric: sqrt(grid_mse).
double metric_grid(MetricKind kind, const Matrix& estimate, const QuantizedGrid& full,
                   const ObservationSplit& split);

struct SweepConfig {
    double side = 19.2;
    double spacing = 1.2;
    std::vector<MetricKind> metrics{MetricKind::Rmse};
    std::vector<std::size_t> n_obs{10};
    std::size_t iterations = 100;
    std::uint64_t seed = 1;
    std::size_t threads = 0;
    std::size_t max_patch_attempts = 100;
    CombiningMode mode = CombiningMode::DbMean;
};

/// One Monte Carlo iteration: draws a set, a patch and a split for `kind` and
/// returns the mean squared error of `estimator` on it.
double evaluate_iteration(std::span<const MeasurementSet> sets, const Estimator& estimator,
                          MetricKind kind, std::size_t n_obs, const SweepConfig& cfg, Rng& rng);

/// Reports for every (metric, n_obs) pair, in that nesting order. Iteration i
/// of each pair uses its own child stream, so output is identical for any
/// thread count.
std::vector<MetricReport> run_sweep(std::span<const MeasurementSet> test_sets,
                                    const Estimator& estimator, const SweepConfig& cfg);

// --- structured experiments ------------------------------------------------

/// Survey geometry used to synthesize measurement sets.
struct SurveyConfig {
    Region region{54.0, 54.0};
    double line_spacing = 1.2;
    double along_spacing = 0.27;
};

/// Measurement set over the survey path for a map generated from `cfg`.
MeasurementSet synthesize_set(const PropagationConfig& cfg, const SurveyConfig& survey);

struct DistanceSweepConfig {
    PropagationConfig propagation;  // transmitter location is overwritten
    SurveyConfig survey{{54.0, 54.0}, 1.2, 0.27};
    std::vector<double> distances;
    double density = 0.001;
    double side = 43.2;
    double spacing = 1.2;
    std::size_t iterations = 500;
    std::uint64_t seed = 1;
    std::size_t threads = 0;
};

struct DistancePoint {
    double distance_m = 0.0;
    MetricReport report;
};

/// RMSE versus transmitter distance from the region center, one synthetic
/// set per distance.
std::vector<DistancePoint> distance_sweep(const Estimator& estimator, const DistanceSweepConfig& cfg);

struct Scenario {
    std::string name;
    PropagationConfig propagation;
};

struct ScenarioSweepConfig {
    std::vector<Scenario> scenarios;
    SurveyConfig survey{{180.0, 180.0}, 4.0, 0.27};
    std::vector<double> densities;
    double side = 40.0;
    double spacing = 4.0;
    std::size_t train_sets = 4;
    std::size_t test_sets = 2;
    std::size_t train_instances = 200;
    std::size_t training_splits = 200;
    std::size_t iterations = 200;
    std::uint64_t seed = 1;
    std::size_t threads = 0;
};

struct ScenarioPoint {
    std::string scenario;
    double density = 0.0;
    KrigingParams params;
    MetricReport report;
};

/// For each scenario and density: retrains Kriging on training sets and
/// reports RMSE on disjoint test sets.
std::vector<ScenarioPoint> scenario_sweep(const SearchGrid& search, const ScenarioSweepConfig& cfg);

/// Spearman rank correlation (average ranks for ties).
double spearman_correlation(std::span<const double> a, std::span<const double> b);

// --- report files ----------------------------------------------------------

inline constexpr const char* kReportHeader =
    "estimator,metric,n_obs,normalized_density,mean_error_db,std_error_db,iterations";

std::string format_report_row(const MetricReport& r);
void write_report_csv(std::ostream& out, std::span<const MetricReport> reports);
void write_distance_csv(std::ostream& out, std::span<const DistancePoint> points);
void write_scenario_csv(std::ostream& out, std::span<const ScenarioPoint> points);

}  // namespace rme
