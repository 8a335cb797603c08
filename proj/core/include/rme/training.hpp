// SPDX-License-Identifier: Apache-2.0
//
// Hyperparameter grid search for the point estimators and Adam training of
// the network estimators.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rme/deep.hpp"
#include "rme/evaluation.hpp"
#include "rme/network.hpp"
#include "rme/random.hpp"
#include "rme/traditional.hpp"

namespace rme {

// --- grid search -----------------------------------------------------------

struct SearchGrid {
    std::vector<std::size_t> knn_k;
    std::vector<double> kriging_var;       // dB^2
    std::vector<double> kriging_halfdist;  // m
    double kriging_noise_var = 1.0;        // dB^2, held fixed
    std::vector<double> krr_reg;
    std::vector<KernelKind> krr_kernels;
    std::vector<double> krr_widths;

    /// K 2..13; variance 0.01^2, 0.11^2, ..., 0.91^2; half distance 50..600 m;
    /// lambda 1e-12..1e-1; Gaussian and Laplacian; width 20..150.
    static SearchGrid defaults();
    /// Throws std::invalid_argument on an empty list or a non-positive value.
    void validate() const;
};

/// Candidates in enumeration order. Simpler models come first (K ascending,
/// half distance descending, lambda descending), so that an exact tie in the
/// objective resolves toward the simpler model.
std::vector<KnnParams> knn_candidates(const SearchGrid& grid);
std::vector<KrigingParams> kriging_candidates(const SearchGrid& grid);
std::vector<KrrParams> krr_candidates(const SearchGrid& grid);

struct NobsRange {
    std::size_t lo = 10;
    std::size_t hi = 100;
};

/// One training split: instance index plus a uniform observed / unobserved
/// partition of its measurements.
struct TrainingSplit {
    std::size_t instance = 0;
    ObservationSplit split;
};

/// `count` splits; the instance is uniform and N_obs uniform on the range,
/// capped at the instance size minus one. Instances with fewer than two
/// measurements are never picked.
std::vector<TrainingSplit> draw_training_splits(std::span<const EstimationInstance> instances,
                                                NobsRange range, std::size_t count, Rng& rng);

/// `count` patches drawn from sets chosen uniformly at random.
std::vector<EstimationInstance> sample_instances(std::span<const MeasurementSet> sets, std::size_t count,
                                                 double side, double spacing, Rng& rng);

/// Sample RMSE of `estimator` over the splits, scored at the unobserved
/// measurements. Reference implementation for the fast scorers below.
double candidate_rmse(const Estimator& estimator, std::span<const EstimationInstance> instances,
                      std::span<const TrainingSplit> splits, double spacing);

/// Sample RMSE of every candidate, in candidate order. Split work runs on
/// `threads` workers; results do not depend on the thread count.
std::vector<double> score_knn(std::span<const KnnParams> candidates,
                              std::span<const EstimationInstance> instances,
                              std::span<const TrainingSplit> splits, std::size_t threads = 0);
std::vector<double> score_kriging(std::span<const KrigingParams> candidates,
                                  std::span<const EstimationInstance> instances,
                                  std::span<const TrainingSplit> splits, std::size_t threads = 0);
std::vector<double> score_krr(std::span<const KrrParams> candidates,
                              std::span<const EstimationInstance> instances,
                              std::span<const TrainingSplit> splits, std::size_t threads = 0);

struct EstimatorSelection {
    bool knn = true;
    bool kriging = true;
    bool krr = true;
};

struct TraditionalTrainingConfig {
    NobsRange n_obs;
    std::size_t splits = 200;
    std::uint64_t seed = 1;
    std::size_t threads = 0;
    EstimatorSelection estimators;
};

struct TraditionalTrainingResult {
    KnnParams knn;
    KrigingParams kriging;
    KrrParams krr;
    /// Objective of every candidate (empty for estimators not trained).
    std::vector<double> knn_scores;
    std::vector<double> kriging_scores;
    std::vector<double> krr_scores;
    double knn_rmse = 0.0;
    double kriging_rmse = 0.0;
    double krr_rmse = 0.0;
};

/// Exhaustive search; all candidates share the same splits. Throws
/// std::invalid_argument without instances.
TraditionalTrainingResult train_traditional(std::span<const EstimationInstance> instances,
                                            const SearchGrid& grid, const TraditionalTrainingConfig& cfg);

/// Index of the smallest score; the first one wins exact ties.
std::size_t argmin_first(std::span<const double> scores);

// --- network training ------------------------------------------------------

/// Masked copy of a quantized patch plus the full target.
struct TrainingExample {
    QuantizedGrid input;
    QuantizedGrid target;
    /// Measurements assigned to the observed entries of `input`.
    std::vector<Measurement> observed_raw;
};

/// `copies` variants of `instance`, each keeping N_obs ~ U{lo..hi} occupied
/// entries (capped at the occupied count). Requires lo >= 1 and lo <= hi.
std::vector<TrainingExample> make_training_examples(const EstimationInstance& instance,
                                                    const GridSpec& spec, NobsRange range,
                                                    std::size_t copies, Rng& rng,
                                                    CombiningMode mode = CombiningMode::DbMean);

enum class NetworkKind { Cnn, Frade };

std::size_t input_channels(NetworkKind kind);

/// Normalized network input with its target and loss mask.
struct NetworkSample {
    Tensor input;
    Matrix target;
    Mask mask;
};

/// Builds samples with the same normalization the estimators apply.
/// `traditional` is only used for FRADE.
std::vector<NetworkSample> build_network_samples(std::span<const TrainingExample> examples,
                                                 NetworkKind kind, const TraditionalParams& traditional,
                                                 std::size_t threads = 0);

struct AdamConfig {
    double learning_rate = 1e-4;
    std::size_t batch_size = 200;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t epochs = 10;
    std::uint64_t seed = 1;
    bool biases_only = false;
    /// Fraction of samples (taken from the end) held out for snapshot
    /// selection; 0 disables the hold-out and returns the final weights.
    double validation_fraction = 0.1;
    std::size_t threads = 0;

    void validate() const;
};

class Adam {
public:
    Adam(std::size_t parameter_count, const AdamConfig& cfg);
    /// One update. Parameters where `frozen` is true are left alone.
    void step(std::span<double> params, std::span<const double> gradient,
              const std::vector<bool>& frozen = {});
    std::size_t steps() const { return t_; }

private:
    AdamConfig cfg_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::size_t t_ = 0;
};

struct TrainingResult {
    NetworkWeights weights;
    /// Mean training loss before any update.
    double initial_loss = 0.0;
    /// Mean training loss after each epoch.
    std::vector<double> history;
    /// Validation loss after each epoch (empty without hold-out).
    std::vector<double> validation;
    /// Epoch whose weights were returned (0 = initial weights).
    std::size_t best_epoch = 0;
};

/// Mean masked loss of `weights` over `samples`.
double mean_loss(std::span<const NetworkSample> samples, const NetworkWeights& weights,
                 std::size_t threads = 0);

/// Mini-batch Adam on the masked squared error. Batch order comes from the
/// seed alone. Throws std::runtime_error when the loss turns non-finite.
TrainingResult train_network(std::span<const NetworkSample> samples, NetworkWeights weights,
                             const AdamConfig& cfg);

struct LearningCurveConfig {
    NetworkKind kind = NetworkKind::Cnn;
    TraditionalParams traditional;
    std::vector<std::size_t> k_values{1};
    double side = 19.2;
    double spacing = 1.2;
    std::size_t instances_per_set = 100;
    std::size_t copies = 5;
    NobsRange n_obs;
    AdamConfig adam;
    std::size_t eval_n_obs = 50;
    std::size_t eval_iterations = 100;
    std::uint64_t seed = 1;
    std::size_t threads = 0;
};

struct LearningCurvePoint {
    std::size_t k = 0;
    double final_loss = 0.0;
    MetricReport report;
};

struct LearningCurve {
    std::vector<LearningCurvePoint> points;
    NetworkWeights weights;
};

/// Trains on the first k training sets for each k, starting from the weights
/// of the previous k, and reports the grid metric over all occupied entries on
/// the test sets. Requires strictly increasing k values within range.
LearningCurve learning_curve(std::span<const MeasurementSet> train_sets,
                             std::span<const MeasurementSet> test_sets, NetworkWeights initial,
                             const LearningCurveConfig& cfg);

}  // namespace rme
