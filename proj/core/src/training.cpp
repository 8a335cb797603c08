// SPDX-License-Identifier: Apache-2.0

#include "rme/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "rme/grid.hpp"
#include "rme/linalg.hpp"
#include "rme/parallel.hpp"
#include "rme/sampling.hpp"

namespace rme {

// --- search grid -----------------------------------------------------------

SearchGrid SearchGrid::defaults() {
    SearchGrid g;
    for (std::size_t k = 2; k <= 13; ++k) g.knn_k.push_back(k);
    for (int i = 0; i <= 9; ++i) {
        const double s = 0.01 + 0.1 * i;
        g.kriging_var.push_back(s * s);
    }
    for (int d = 50; d <= 600; d += 50) g.kriging_halfdist.push_back(d);
    for (int e = -12; e <= -1; ++e) g.krr_reg.push_back(std::pow(10.0, e));
    g.krr_kernels = {KernelKind::Gaussian, KernelKind::Laplacian};
    for (int w = 20; w <= 150; w += 10) g.krr_widths.push_back(w);
    return g;
}

void SearchGrid::validate() const {
    if (knn_k.empty() || kriging_var.empty() || kriging_halfdist.empty() || krr_reg.empty() ||
        krr_kernels.empty() || krr_widths.empty())
        throw std::invalid_argument("every search list needs at least one value");
    const auto positive = [](const auto& v) {
        return std::all_of(v.begin(), v.end(), [](auto x) { return x > 0; });
    };
    if (!positive(knn_k) || !positive(kriging_halfdist) || !positive(krr_reg) || !positive(krr_widths))
        throw std::invalid_argument("search values must be positive");
    if (!std::all_of(kriging_var.begin(), kriging_var.end(), [](double v) { return v >= 0.0; }) ||
        !(kriging_noise_var >= 0.0))
        throw std::invalid_argument("variances must be non-negative");
}

std::vector<KnnParams> knn_candidates(const SearchGrid& grid) {
    auto ks = grid.knn_k;
    std::stable_sort(ks.begin(), ks.end());
    std::vector<KnnParams> out;
    for (const auto k : ks) out.push_back({k});
    return out;
}

std::vector<KrigingParams> kriging_candidates(const SearchGrid& grid) {
    auto dists = grid.kriging_halfdist;
    std::stable_sort(dists.begin(), dists.end(), std::greater<>());
    std::vector<KrigingParams> out;
    for (const double d : dists)
        for (const double v : grid.kriging_var) out.push_back({v, d, grid.kriging_noise_var});
    return out;
}

std::vector<KrrParams> krr_candidates(const SearchGrid& grid) {
    auto regs = grid.krr_reg;
    std::stable_sort(regs.begin(), regs.end(), std::greater<>());
    std::vector<KrrParams> out;
    for (const double r : regs)
        for (const auto kind : grid.krr_kernels)
            for (const double w : grid.krr_widths) out.push_back({r, kind, w});
    return out;
}

// --- splits ----------------------------------------------------------------

std::vector<TrainingSplit> draw_training_splits(std::span<const EstimationInstance> instances,
                                                NobsRange range, std::size_t count, Rng& rng) {
    if (range.lo < 1 || range.lo > range.hi) throw std::invalid_argument("invalid N_obs range");
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < instances.size(); ++i)
        if (instances[i].size() >= 2) usable.push_back(i);
    if (usable.empty()) throw std::invalid_argument("no training instance has two measurements");
    std::vector<TrainingSplit> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        const auto inst = usable[uniform_int<std::size_t>(rng, 0, usable.size() - 1)];
        const auto n = uniform_int<std::size_t>(rng, range.lo, range.hi);
        const auto n_obs = std::min(n, instances[inst].size() - 1);
        out.push_back({inst, split_uniform(instances[inst].size(), n_obs, rng)});
    }
    return out;
}

std::vector<EstimationInstance> sample_instances(std::span<const MeasurementSet> sets, std::size_t count,
                                                 double side, double spacing, Rng& rng) {
    if (sets.empty()) throw std::invalid_argument("no measurement sets");
    std::vector<EstimationInstance> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto& set = sets[uniform_int<std::size_t>(rng, 0, sets.size() - 1)];
        out.push_back(sample_patch(set, side, spacing, rng));
    }
    return out;
}

// --- scoring ---------------------------------------------------------------

namespace {

struct SplitData {
    std::vector<Measurement> obs;
    std::vector<Measurement> nobs;
};

SplitData split_data(std::span<const EstimationInstance> instances, const TrainingSplit& s) {
    const auto& all = instances[s.instance].measurements;
    return {select(all, s.split.obs), select(all, s.split.nobs)};
}

double mean_of(std::span<const Measurement> m) {
    double s = 0.0;
    for (const auto& x : m) s += x.power_db;
    return s / static_cast<double>(m.size());
}

/// rmse per candidate from a splits x candidates table of squared-error means.
std::vector<double> aggregate(const std::vector<std::vector<double>>& mses, std::size_t candidates) {
    std::vector<double> out(candidates, 0.0);
    for (std::size_t c = 0; c < candidates; ++c) {
        std::vector<double> col;
        col.reserve(mses.size());
        for (const auto& row : mses) col.push_back(row[c]);
        out[c] = rmse_from_mses(col);
    }
    return out;
}

void require_inputs(std::span<const TrainingSplit> splits, std::size_t candidates) {
    if (splits.empty()) throw std::invalid_argument("no training splits");
    if (candidates == 0) throw std::invalid_argument("no candidates");
}

}  // namespace

double candidate_rmse(const Estimator& estimator, std::span<const EstimationInstance> instances,
                      std::span<const TrainingSplit> splits, double spacing) {
    std::vector<double> mses;
    mses.reserve(splits.size());
    for (const auto& s : splits) {
        const auto& inst = instances[s.instance];
        const auto spec = patch_grid_spec(inst.patch.corner, inst.patch.side, spacing);
        ObservedData data;
        data.raw = select(inst.measurements, s.split.obs);
        data.grid = quantize(data.raw, spec);
        const auto est = estimator.estimate(data);
        std::vector<double> e, t;
        for (const auto n : s.split.nobs) {
            e.push_back(est.evaluate(inst.measurements[n].loc));
            t.push_back(inst.measurements[n].power_db);
        }
        mses.push_back(mean_squared_error(e, t));
    }
    return rmse_from_mses(mses);
}

std::vector<double> score_knn(std::span<const KnnParams> candidates,
                              std::span<const EstimationInstance> instances,
                              std::span<const TrainingSplit> splits, std::size_t threads) {
    require_inputs(splits, candidates.size());
    std::vector<std::vector<double>> mses(splits.size());
    parallel_for(
        splits.size(),
        [&](std::size_t s) {
            const auto d = split_data(instances, splits[s]);
            std::vector<double> sq(candidates.size(), 0.0);
            std::vector<double> prefix(d.obs.size() + 1);
            for (const auto& q : d.nobs) {
                const auto order = neighbor_order(d.obs, q.loc);
                prefix[0] = 0.0;
                for (std::size_t r = 0; r < order.size(); ++r) prefix[r + 1] = prefix[r] + d.obs[order[r]].power_db;
                for (std::size_t c = 0; c < candidates.size(); ++c) {
                    const auto k = std::min(candidates[c].k, d.obs.size());
                    const double e = q.power_db - prefix[k] / static_cast<double>(k);
                    sq[c] += e * e;
                }
            }
            for (auto& v : sq) v /= static_cast<double>(d.nobs.size());
            mses[s] = std::move(sq);
        },
        threads);
    return aggregate(mses, candidates.size());
}

std::vector<double> score_kriging(std::span<const KrigingParams> candidates,
                                  std::span<const EstimationInstance> instances,
                                  std::span<const TrainingSplit> splits, std::size_t threads) {
    require_inputs(splits, candidates.size());
    std::vector<std::vector<double>> mses(splits.size());
    parallel_for(
        splits.size(),
        [&](std::size_t s) {
            const auto d = split_data(instances, splits[s]);
            const auto n = static_cast<Eigen::Index>(d.obs.size());
            const auto m = static_cast<Eigen::Index>(d.nobs.size());
            const double mean = mean_of(d.obs);
            Vector centered(n);
            Matrix dist(n, n), cross(m, n);
            for (Eigen::Index a = 0; a < n; ++a) {
                centered[a] = d.obs[static_cast<std::size_t>(a)].power_db - mean;
                for (Eigen::Index b = 0; b < n; ++b)
                    dist(a, b) = distance(d.obs[static_cast<std::size_t>(a)].loc, d.obs[static_cast<std::size_t>(b)].loc);
            }
            for (Eigen::Index q = 0; q < m; ++q)
                for (Eigen::Index b = 0; b < n; ++b)
                    cross(q, b) = distance(d.nobs[static_cast<std::size_t>(q)].loc, d.obs[static_cast<std::size_t>(b)].loc);

            std::vector<double> sq(candidates.size(), 0.0);
            double cached_half = -1.0;
            Matrix corr, corr_cross;
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                const auto& p = candidates[c];
                if (p.shadow_half_distance != cached_half) {
                    cached_half = p.shadow_half_distance;
                    corr = dist.unaryExpr([h = cached_half](double x) { return std::exp2(-x / h); });
                    corr_cross = cross.unaryExpr([h = cached_half](double x) { return std::exp2(-x / h); });
                }
                Matrix cov = p.shadow_variance * corr;
                cov.diagonal().array() += p.noise_variance;
                const Vector w = JitteredCholesky(cov).solve(centered);
                const Vector pred = (p.shadow_variance * (corr_cross * w)).array() + mean;
                double acc = 0.0;
                for (Eigen::Index q = 0; q < m; ++q) {
                    const double e = d.nobs[static_cast<std::size_t>(q)].power_db - pred[q];
                    acc += e * e;
                }
                sq[c] = acc / static_cast<double>(m);
            }
            mses[s] = std::move(sq);
        },
        threads);
    return aggregate(mses, candidates.size());
}

std::vector<double> score_krr(std::span<const KrrParams> candidates,
                              std::span<const EstimationInstance> instances,
                              std::span<const TrainingSplit> splits, std::size_t threads) {
    require_inputs(splits, candidates.size());
    for (const auto& p : candidates)
        if (!(p.regularization > 0.0) || !(p.width > 0.0))
            throw std::invalid_argument("KRR candidates need positive lambda and width");

    // Distinct (kernel, width) pairs share one eigendecomposition per split.
    struct Shape {
        KernelKind kind;
        double width;
    };
    std::vector<Shape> shapes;
    std::vector<std::size_t> shape_of(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const auto it = std::find_if(shapes.begin(), shapes.end(), [&](const Shape& s) {
            return s.kind == candidates[c].kernel && s.width == candidates[c].width;
        });
        shape_of[c] = static_cast<std::size_t>(it - shapes.begin());
        if (it == shapes.end()) shapes.push_back({candidates[c].kernel, candidates[c].width});
    }

    std::vector<std::vector<double>> mses(splits.size());
    parallel_for(
        splits.size(),
        [&](std::size_t s) {
            const auto d = split_data(instances, splits[s]);
            std::vector<Location> ol, ql;
            for (const auto& x : d.obs) ol.push_back(x.loc);
            for (const auto& x : d.nobs) ql.push_back(x.loc);
            const double mean = mean_of(d.obs);
            Vector y(static_cast<Eigen::Index>(d.obs.size()));
            for (std::size_t a = 0; a < d.obs.size(); ++a) y[static_cast<Eigen::Index>(a)] = d.obs[a].power_db - mean;
            const double n = static_cast<double>(d.obs.size());

            struct Decomp {
                Matrix q;
                Vector e;
                Vector qty;
                Matrix cross;
            };
            std::vector<Decomp> dec(shapes.size());
            for (std::size_t h = 0; h < shapes.size(); ++h) {
                const Eigen::SelfAdjointEigenSolver<Matrix> eig(kernel_matrix(shapes[h].kind, shapes[h].width, ol, ol));
                if (eig.info() != Eigen::Success) throw NumericalError("KRR eigendecomposition failed");
                dec[h].q = eig.eigenvectors();
                dec[h].e = eig.eigenvalues();
                dec[h].qty = dec[h].q.transpose() * y;
                dec[h].cross = kernel_matrix(shapes[h].kind, shapes[h].width, ql, ol);
            }

            std::vector<double> sq(candidates.size(), 0.0);
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                const auto& dc = dec[shape_of[c]];
                const Vector gain = dc.e.array() / (dc.e.array().square() + n * candidates[c].regularization);
                const Vector alpha = dc.q * (gain.asDiagonal() * dc.qty);
                const Vector pred = (dc.cross * alpha).array() + mean;
                double acc = 0.0;
                for (std::size_t q = 0; q < d.nobs.size(); ++q) {
                    const double e = d.nobs[q].power_db - pred[static_cast<Eigen::Index>(q)];
                    acc += e * e;
                }
                sq[c] = acc / static_cast<double>(d.nobs.size());
            }
            mses[s] = std::move(sq);
        },
        threads);
    return aggregate(mses, candidates.size());
}

std::size_t argmin_first(std::span<const double> scores) {
    if (scores.empty()) throw std::invalid_argument("no scores");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] < scores[best]) best = i;
    return best;
}

TraditionalTrainingResult train_traditional(std::span<const EstimationInstance> instances,
                                            const SearchGrid& grid, const TraditionalTrainingConfig& cfg) {
    if (instances.empty()) throw std::invalid_argument("train_traditional needs at least one instance");
    grid.validate();
    Rng rng(cfg.seed);
    const auto splits = draw_training_splits(instances, cfg.n_obs, cfg.splits, rng);

    TraditionalTrainingResult r;
    if (cfg.estimators.knn) {
        const auto cands = knn_candidates(grid);
        r.knn_scores = score_knn(cands, instances, splits, cfg.threads);
        const auto best = argmin_first(r.knn_scores);
        r.knn = cands[best];
        r.knn_rmse = r.knn_scores[best];
    }
    if (cfg.estimators.kriging) {
        const auto cands = kriging_candidates(grid);
        r.kriging_scores = score_kriging(cands, instances, splits, cfg.threads);
        const auto best = argmin_first(r.kriging_scores);
        r.kriging = cands[best];
        r.kriging_rmse = r.kriging_scores[best];
    }
    if (cfg.estimators.krr) {
        const auto cands = krr_candidates(grid);
        r.krr_scores = score_krr(cands, instances, splits, cfg.threads);
        const auto best = argmin_first(r.krr_scores);
        r.krr = cands[best];
        r.krr_rmse = r.krr_scores[best];
    }
    return r;
}

// --- training examples -----------------------------------------------------

std::vector<TrainingExample> make_training_examples(const EstimationInstance& instance,
                                                    const GridSpec& spec, NobsRange range,
                                                    std::size_t copies, Rng& rng, CombiningMode mode) {
    if (range.lo < 1 || range.lo > range.hi) throw std::invalid_argument("invalid N_obs range");
    const auto full = quantize(instance, spec, mode);
    const auto occupied = occupied_entries(full);
    std::vector<TrainingExample> out;
    if (occupied.empty()) return out;
    const auto cells = assign_to_grid(instance.measurements, spec);
    out.reserve(copies);
    for (std::size_t c = 0; c < copies; ++c) {
        const auto n = std::min(uniform_int<std::size_t>(rng, range.lo, range.hi), occupied.size());
        const auto split = split_entries(occupied, n, rng);
        TrainingExample ex{restrict_grid(full, split.obs), full, {}};
        for (std::size_t m = 0; m < cells.size(); ++m)
            if (std::binary_search(split.obs.begin(), split.obs.end(), cells[m]))
                ex.observed_raw.push_back(instance.measurements[m]);
        out.push_back(std::move(ex));
    }
    return out;
}

std::size_t input_channels(NetworkKind kind) { return kind == NetworkKind::Cnn ? 2 : 5; }

std::vector<NetworkSample> build_network_samples(std::span<const TrainingExample> examples,
                                                 NetworkKind kind, const TraditionalParams& traditional,
                                                 std::size_t threads) {
    std::vector<NetworkSample> out(examples.size());
    parallel_for(
        examples.size(),
        [&](std::size_t i) {
            const auto& ex = examples[i];
            const Tensor raw = kind == NetworkKind::Cnn
                                   ? cnn_input(ex.input)
                                   : frade_input(ex.input, ex.observed_raw, traditional.knn,
                                                 traditional.kriging, traditional.krr);
            auto norm = normalize_input(raw);
            Matrix target = (ex.target.values.array() - norm.offset) / kNetworkScale;
            target = (ex.target.mask.cast<double>().array() > 0.0).select(target, 0.0);
            out[i] = {std::move(norm.tensor), std::move(target), ex.target.mask};
        },
        threads);
    return out;
}

// --- Adam ------------------------------------------------------------------

void AdamConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw std::invalid_argument("Adam betas must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw std::invalid_argument("Adam epsilon must be positive");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
        throw std::invalid_argument("validation fraction must lie in [0, 1)");
}

Adam::Adam(std::size_t parameter_count, const AdamConfig& cfg)
    : cfg_(cfg), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {
    cfg_.validate();
}

void Adam::step(std::span<double> params, std::span<const double> gradient, const std::vector<bool>& frozen) {
    if (params.size() != m_.size() || gradient.size() != m_.size())
        throw std::invalid_argument("Adam parameter count mismatch");
    if (!frozen.empty() && frozen.size() != m_.size()) throw std::invalid_argument("frozen mask size mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!frozen.empty() && frozen[i]) continue;
        const double g = gradient[i];
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
        params[i] -= cfg_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.epsilon);
    }
}

// --- network training ------------------------------------------------------

double mean_loss(std::span<const NetworkSample> samples, const NetworkWeights& weights, std::size_t threads) {
    if (samples.empty()) return 0.0;
    std::vector<double> losses(samples.size());
    parallel_for(
        samples.size(),
        [&](std::size_t i) {
            losses[i] = masked_mse(network_forward(samples[i].input, weights), samples[i].target, samples[i].mask);
        },
        threads);
    return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(samples.size());
}

namespace {

void check_finite(double loss, std::size_t epoch, const char* what) {
    if (!std::isfinite(loss))
        throw std::runtime_error(
            fmt::format("{} loss became {} at epoch {}; lower the learning rate", what, loss, epoch));
}

}  // namespace

TrainingResult train_network(std::span<const NetworkSample> samples, NetworkWeights weights,
                             const AdamConfig& cfg) {
    cfg.validate();
    if (samples.empty()) throw std::invalid_argument("no training samples");
    for (const auto& s : samples)
        if (s.input.channels != weights.input_channels())
            throw std::invalid_argument(fmt::format("sample has {} channels but the weights expect {}",
                                                    s.input.channels, weights.input_channels()));

    std::size_t n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * samples.size()));
    if (n_val >= samples.size()) n_val = 0;
    const auto train = samples.first(samples.size() - n_val);
    const auto val = samples.last(n_val);

    std::vector<bool> frozen;
    if (cfg.biases_only) {
        frozen = weights.bias_mask();
        frozen.flip();
    }

    TrainingResult r{weights, 0.0, {}, {}, 0};
    r.initial_loss = mean_loss(train, weights, cfg.threads);
    check_finite(r.initial_loss, 0, "training");
    double best_val = n_val > 0 ? mean_loss(val, weights, cfg.threads) : 0.0;

    Adam adam(weights.parameter_count(), cfg);
    std::vector<std::size_t> order(train.size());
    std::vector<std::vector<double>> grads;
    std::vector<double> batch_grad(weights.parameter_count());

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng = child_rng(cfg.seed, epoch);
        std::shuffle(order.begin(), order.end(), rng);

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t len = std::min(cfg.batch_size, order.size() - start);
            grads.resize(len);
            parallel_for(
                len,
                [&](std::size_t b) {
                    const auto& s = train[order[start + b]];
                    masked_mse_gradient(s.input, s.target, s.mask, weights, grads[b]);
                },
                cfg.threads);
            std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
            for (std::size_t b = 0; b < len; ++b)
                for (std::size_t p = 0; p < batch_grad.size(); ++p) batch_grad[p] += grads[b][p];
            for (auto& g : batch_grad) g /= static_cast<double>(len);
            adam.step(weights.params(), batch_grad, frozen);
        }

        const double loss = mean_loss(train, weights, cfg.threads);
        check_finite(loss, epoch, "training");
        r.history.push_back(loss);
        if (n_val > 0) {
            const double v = mean_loss(val, weights, cfg.threads);
            check_finite(v, epoch, "validation");
            r.validation.push_back(v);
            if (v < best_val) {
                best_val = v;
                r.weights = weights;
                r.best_epoch = epoch;
            }
        }
    }
    if (n_val == 0) {
        r.weights = weights;
        r.best_epoch = cfg.epochs;
    }
    return r;
}

LearningCurve learning_curve(std::span<const MeasurementSet> train_sets,
                             std::span<const MeasurementSet> test_sets, NetworkWeights initial,
                             const LearningCurveConfig& cfg) {
    if (cfg.k_values.empty()) throw std::invalid_argument("learning curve needs k values");
    for (std::size_t i = 0; i < cfg.k_values.size(); ++i) {
        const auto k = cfg.k_values[i];
        if (k < 1 || k > train_sets.size() || (i > 0 && k <= cfg.k_values[i - 1]))
            throw std::invalid_argument("k values must increase strictly within the training set count");
    }
    if (initial.input_channels() != input_channels(cfg.kind))
        throw std::invalid_argument("initial weights do not match the network kind");

    LearningCurve curve{{}, std::move(initial)};
    for (std::size_t i = 0; i < cfg.k_values.size(); ++i) {
        const auto k = cfg.k_values[i];
        Rng rng = child_rng(cfg.seed, k);
        const auto instances = sample_instances(train_sets.first(k), cfg.instances_per_set * k, cfg.side,
                                                cfg.spacing, rng);
        std::vector<TrainingExample> examples;
        for (const auto& inst : instances) {
            const auto spec = patch_grid_spec(inst.patch.corner, cfg.side, cfg.spacing);
            auto ex = make_training_examples(inst, spec, cfg.n_obs, cfg.copies, rng);
            std::move(ex.begin(), ex.end(), std::back_inserter(examples));
        }
        const auto samples = build_network_samples(examples, cfg.kind, cfg.traditional, cfg.threads);
        AdamConfig adam = cfg.adam;
        adam.seed = child_seed(cfg.adam.seed, k);
        auto trained = train_network(samples, curve.weights, adam);
        curve.weights = trained.weights;

        SweepConfig sweep;
        sweep.side = cfg.side;
        sweep.spacing = cfg.spacing;
        sweep.metrics = {MetricKind::RmseGridAll};
        sweep.n_obs = {cfg.eval_n_obs};
        sweep.iterations = cfg.eval_iterations;
        sweep.seed = child_seed(cfg.seed, 10000);
        sweep.threads = cfg.threads;
        MetricReport report;
        if (cfg.kind == NetworkKind::Cnn)
            report = run_sweep(test_sets, NetworkEstimator(curve.weights), sweep).front();
        else
            report = run_sweep(test_sets, FradeEstimator(cfg.traditional, curve.weights), sweep).front();
        curve.points.push_back(
            {k, trained.history.empty() ? trained.initial_loss : trained.history.back(), report});
    }
    return curve;
}

}  // namespace rme
