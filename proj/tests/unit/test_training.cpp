// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <set>

#include "rme/grid.hpp"
#include "rme/sampling.hpp"
#include "rme/synthgen.hpp"
#include "rme/training.hpp"
#include "support.hpp"

using namespace rme;
using doctest::Approx;

namespace {

std::vector<EstimationInstance> shadowed_instances(std::size_t count, std::uint64_t seed) {
    PropagationConfig p;
    p.shadow_variance = 9.0;
    p.shadow_half_distance = 15.0;
    p.noise_std = 1.0;
    p.tx_location = {-30.0, 20.0};
    p.seed = seed;
    p.field_spacing = 1.2;
    const SurveyConfig survey{{36.0, 36.0}, 1.2, 0.6};
    const std::vector<MeasurementSet> sets{synthesize_set(p, survey)};
    Rng rng(seed);
    return sample_instances(sets, count, 19.2, 1.2, rng);
}

SearchGrid small_grid() {
    SearchGrid g;
    g.knn_k = {1, 3, 8};
    g.kriging_var = {1.0, 9.0};
    g.kriging_halfdist = {5.0, 50.0};
    g.krr_reg = {1e-4, 1e-1};
    g.krr_kernels = {KernelKind::Gaussian, KernelKind::Laplacian};
    g.krr_widths = {20.0, 60.0};
    return g;
}

}  // namespace

TEST_SUITE_BEGIN("training");

TEST_CASE("default search grid") {
    const auto g = SearchGrid::defaults();
    CHECK(g.knn_k.size() == 12);
    CHECK(g.knn_k.front() == 2);
    CHECK(g.knn_k.back() == 13);
    REQUIRE(g.kriging_var.size() == 10);
    CHECK(g.kriging_var.front() == Approx(0.0001));
    CHECK(g.kriging_var[5] == Approx(0.51 * 0.51));
    CHECK(g.kriging_var.back() == Approx(0.8281));
    CHECK(g.kriging_halfdist.size() == 12);
    CHECK(g.kriging_halfdist.back() == 600.0);
    CHECK(g.krr_reg.size() == 12);
    CHECK(g.krr_reg.front() == Approx(1e-12));
    CHECK(g.krr_reg.back() == Approx(0.1));
    CHECK(g.krr_widths.size() == 14);
    CHECK(g.kriging_noise_var == 1.0);
    CHECK_NOTHROW(g.validate());
    auto bad = g;
    bad.knn_k.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("candidate enumeration puts simpler models first") {
    const auto g = small_grid();
    const auto knn = knn_candidates(g);
    CHECK(knn.front().k == 1);
    const auto kr = kriging_candidates(g);
    REQUIRE(kr.size() == 4);
    CHECK(kr.front().shadow_half_distance == 50.0);
    const auto krr = krr_candidates(g);
    REQUIRE(krr.size() == 8);
    CHECK(krr.front().regularization == 1e-1);
    CHECK(argmin_first(std::vector<double>{2.0, 1.0, 1.0}) == 1);
}

TEST_CASE("a single-candidate grid returns that candidate") {
    const auto instances = shadowed_instances(10, 3);
    SearchGrid g;
    g.knn_k = {4};
    g.kriging_var = {2.0};
    g.kriging_halfdist = {70.0};
    g.krr_reg = {1e-3};
    g.krr_kernels = {KernelKind::Laplacian};
    g.krr_widths = {30.0};
    TraditionalTrainingConfig cfg;
    cfg.splits = 10;
    const auto r = train_traditional(instances, g, cfg);
    CHECK(r.knn.k == 4);
    CHECK(r.kriging.shadow_variance == 2.0);
    CHECK(r.kriging.shadow_half_distance == 70.0);
    CHECK(r.krr.kernel == KernelKind::Laplacian);
    CHECK(r.krr.width == 30.0);
    CHECK_THROWS_AS(train_traditional(std::vector<EstimationInstance>{}, g, cfg), std::invalid_argument);
}

TEST_CASE("fast scores agree with the generic estimator path and the search is exhaustive") {
    const auto instances = shadowed_instances(20, 5);
    const auto g = small_grid();
    Rng rng(11);
    const auto splits = draw_training_splits(instances, {10, 60}, 25, rng);

    const auto knn = knn_candidates(g);
    const auto ks = score_knn(knn, instances, splits);
    for (std::size_t c = 0; c < knn.size(); ++c)
        CHECK(ks[c] == Approx(candidate_rmse(KnnEstimator(knn[c]), instances, splits, 1.2)).epsilon(1e-12));

    const auto kr = kriging_candidates(g);
    const auto krs = score_kriging(kr, instances, splits);
    for (std::size_t c = 0; c < kr.size(); ++c)
        CHECK(krs[c] == Approx(candidate_rmse(KrigingEstimator(kr[c]), instances, splits, 1.2)).epsilon(1e-9));

    const auto krr = krr_candidates(g);
    const auto rrs = score_krr(krr, instances, splits);
    for (std::size_t c = 0; c < krr.size(); ++c)
        CHECK(rrs[c] == Approx(candidate_rmse(KrrEstimator(krr[c]), instances, splits, 1.2)).epsilon(1e-9));

    TraditionalTrainingConfig cfg;
    cfg.n_obs = {10, 60};
    cfg.splits = 25;
    cfg.seed = 4;
    const auto r = train_traditional(instances, g, cfg);
    for (const double s : r.kriging_scores) CHECK(r.kriging_rmse <= s);
    for (const double s : r.krr_scores) CHECK(r.krr_rmse <= s);
    for (const double s : r.knn_scores) CHECK(r.knn_rmse <= s);

    cfg.threads = 3;
    const auto again = train_traditional(instances, g, cfg);
    CHECK(again.kriging_scores == r.kriging_scores);
    CHECK(again.krr_scores == r.krr_scores);
    CHECK(again.knn_scores == r.knn_scores);
}

TEST_CASE("training splits respect the N_obs range and instance size") {
    const auto instances = shadowed_instances(8, 9);
    Rng rng(1);
    const auto splits = draw_training_splits(instances, {5, 5}, 40, rng);
    for (const auto& s : splits) {
        CHECK(s.split.obs.size() == std::min<std::size_t>(5, instances[s.instance].size() - 1));
        CHECK(s.split.obs.size() + s.split.nobs.size() == instances[s.instance].size());
    }
    CHECK_THROWS_AS(draw_training_splits(instances, {0, 3}, 1, rng), std::invalid_argument);
    CHECK_THROWS_AS(draw_training_splits(instances, {4, 3}, 1, rng), std::invalid_argument);
}

TEST_CASE("training examples") {
    const auto set = test::dense_set({19.2, 19.2}, 0.6, 4);
    const EstimationInstance inst{set.measurements(), {{0.0, 0.0}, 19.2}};
    const auto spec = patch_grid_spec({0.0, 0.0}, 19.2, 1.2);
    Rng rng(2);
    const auto ex = make_training_examples(inst, spec, {30, 30}, 5, rng);
    REQUIRE(ex.size() == 5);
    std::set<std::vector<std::size_t>> patterns;
    for (const auto& e : ex) {
        CHECK(e.input.occupied_count() == 30);
        CHECK(e.target.occupied_count() == 256);
        for (Eigen::Index i = 0; i < e.input.values.size(); ++i) {
            if (e.input.mask.data()[i] == 0) CHECK(e.input.values.data()[i] == 0.0);
            else CHECK(e.input.values.data()[i] == e.target.values.data()[i]);
        }
        CHECK_FALSE(e.observed_raw.empty());
        patterns.insert(occupied_entries(e.input));
    }
    CHECK(patterns.size() == 5);

    const auto capped = make_training_examples(inst, spec, {400, 500}, 2, rng);
    for (const auto& e : capped) CHECK(e.input.occupied_count() == 256);
    CHECK_THROWS_AS(make_training_examples(inst, spec, {0, 3}, 1, rng), std::invalid_argument);

    // 40 instances x 5 copies.
    std::size_t total = 0;
    for (int k = 0; k < 40; ++k) total += make_training_examples(inst, spec, {10, 100}, 5, rng).size();
    CHECK(total == 200);
}

TEST_CASE("Adam updates") {
    AdamConfig cfg;
    cfg.learning_rate = 0.01;
    Adam zero(3, cfg);
    std::vector<double> p{1.0, -2.0, 3.0};
    const auto before = p;
    zero.step(p, std::vector<double>{0.0, 0.0, 0.0});
    CHECK(p == before);

    Adam adam(3, cfg);
    adam.step(p, std::vector<double>{0.5, -4.0, 0.0}, {false, false, true});
    // First bias-corrected step moves each parameter by lr * sign(g).
    CHECK(p[0] == Approx(1.0 - 0.01).epsilon(1e-6));
    CHECK(p[1] == Approx(-2.0 + 0.01).epsilon(1e-6));
    CHECK(p[2] == 3.0);
    CHECK(adam.steps() == 1);

    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(Adam(3, cfg), std::invalid_argument);
}

TEST_CASE("one training step applies Adam to the batch gradient") {
    const auto instances = shadowed_instances(4, 21);
    std::vector<TrainingExample> ex;
    Rng rng(3);
    for (const auto& inst : instances) {
        auto e = make_training_examples(inst, patch_grid_spec(inst.patch.corner, 19.2, 1.2), {20, 40}, 2, rng);
        ex.insert(ex.end(), e.begin(), e.end());
    }
    const auto samples = build_network_samples(ex, NetworkKind::Cnn, {});
    const auto w0 = NetworkWeights::random(2, 5);

    AdamConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = samples.size();
    cfg.validation_fraction = 0.0;
    cfg.learning_rate = 1e-3;
    const auto r = train_network(samples, w0, cfg);

    std::vector<double> sum(w0.parameter_count(), 0.0), g;
    for (const auto& s : samples) {
        masked_mse_gradient(s.input, s.target, s.mask, w0, g);
        for (std::size_t p = 0; p < sum.size(); ++p) sum[p] += g[p];
    }
    for (auto& v : sum) v /= static_cast<double>(samples.size());
    auto manual = w0;
    Adam adam(manual.parameter_count(), cfg);
    adam.step(manual.params(), sum);
    double worst = 0.0;
    for (std::size_t p = 0; p < sum.size(); ++p)
        worst = std::max(worst, std::abs(manual.params()[p] - r.weights.params()[p]));
    CHECK(worst < 1e-12);
}

TEST_CASE("biases-only training on zero targets never increases the loss") {
    const auto instances = shadowed_instances(6, 33);
    std::vector<TrainingExample> ex;
    Rng rng(8);
    for (const auto& inst : instances) {
        auto e = make_training_examples(inst, patch_grid_spec(inst.patch.corner, 19.2, 1.2), {20, 40}, 2, rng);
        ex.insert(ex.end(), e.begin(), e.end());
    }
    auto samples = build_network_samples(ex, NetworkKind::Cnn, {});
    for (auto& s : samples) s.target.setZero();
    const auto w0 = NetworkWeights::random(2, 12);

    AdamConfig cfg;
    cfg.epochs = 10;
    cfg.batch_size = samples.size();
    cfg.validation_fraction = 0.0;
    cfg.learning_rate = 1e-3;
    cfg.biases_only = true;
    const auto r = train_network(samples, w0, cfg);
    double prev = r.initial_loss;
    for (const double l : r.history) {
        CHECK(l <= prev + 1e-15);
        prev = l;
    }
    const auto biases = w0.bias_mask();
    for (std::size_t p = 0; p < biases.size(); ++p)
        if (!biases[p]) CHECK(r.weights.params()[p] == w0.params()[p]);
}

TEST_CASE("network training is reproducible and keeps the best validation snapshot") {
    const auto instances = shadowed_instances(10, 44);
    std::vector<TrainingExample> ex;
    Rng rng(4);
    for (const auto& inst : instances) {
        auto e = make_training_examples(inst, patch_grid_spec(inst.patch.corner, 19.2, 1.2), {20, 60}, 2, rng);
        ex.insert(ex.end(), e.begin(), e.end());
    }
    const auto samples = build_network_samples(ex, NetworkKind::Cnn, {});
    AdamConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 4;
    cfg.learning_rate = 1e-3;
    const auto a = train_network(samples, NetworkWeights::random(2, 1), cfg);
    cfg.threads = 2;
    const auto b = train_network(samples, NetworkWeights::random(2, 1), cfg);
    CHECK(a.weights == b.weights);
    CHECK(a.history == b.history);
    CHECK(a.history.size() == 3);
    CHECK(a.validation.size() == 3);
    CHECK(a.best_epoch <= 3);
}

TEST_CASE("fifty epochs on 500 examples at least halve the loss") {
    const auto instances = shadowed_instances(100, 55);
    std::vector<TrainingExample> ex;
    Rng rng(12);
    for (const auto& inst : instances) {
        auto e = make_training_examples(inst, patch_grid_spec(inst.patch.corner, 19.2, 1.2), {10, 100}, 5, rng);
        ex.insert(ex.end(), e.begin(), e.end());
    }
    REQUIRE(ex.size() == 500);
    const auto samples = build_network_samples(ex, NetworkKind::Cnn, {});
    AdamConfig cfg;
    cfg.epochs = 50;
    cfg.batch_size = 32;
    cfg.learning_rate = 1e-3;
    cfg.validation_fraction = 0.0;
    const auto r = train_network(samples, NetworkWeights::random(2, 21), cfg);
    REQUIRE(r.history.size() == 50);
    MESSAGE("loss " << r.initial_loss << " -> " << r.history.back());
    CHECK(r.history.back() <= 0.5 * r.initial_loss);
}

TEST_CASE("non-finite loss aborts training") {
    NetworkSample s{Tensor::zeros(2, 4, 4), Matrix::Zero(4, 4), Mask::Ones(4, 4)};
    s.target(0, 0) = std::nan("");
    AdamConfig cfg;
    cfg.validation_fraction = 0.0;
    const std::vector<NetworkSample> samples{s};
    CHECK_THROWS_AS(train_network(samples, NetworkWeights::random(2, 1), cfg), std::runtime_error);
    CHECK_THROWS_AS(train_network(samples, NetworkWeights::random(5, 1), cfg), std::invalid_argument);
}

TEST_CASE("learning curve rows and validation") {
    PropagationConfig p;
    p.shadow_variance = 4.0;
    p.shadow_half_distance = 10.0;
    p.field_spacing = 1.2;
    const SurveyConfig survey{{24.0, 24.0}, 1.2, 0.6};
    std::vector<MeasurementSet> sets;
    for (std::uint64_t s = 0; s < 3; ++s) {
        p.seed = 70 + s;
        sets.push_back(synthesize_set(p, survey));
    }
    const std::span<const MeasurementSet> train(sets.data(), 2), test(sets.data() + 2, 1);
    LearningCurveConfig cfg;
    cfg.k_values = {1};
    cfg.instances_per_set = 4;
    cfg.copies = 1;
    cfg.n_obs = {10, 20};
    cfg.adam.epochs = 1;
    cfg.adam.batch_size = 2;
    cfg.eval_n_obs = 10;
    cfg.eval_iterations = 3;
    const auto one = learning_curve(train, test, NetworkWeights::random(2, 3), cfg);
    CHECK(one.points.size() == 1);
    cfg.k_values = {1, 2};
    const auto two = learning_curve(train, test, NetworkWeights::random(2, 3), cfg);
    REQUIRE(two.points.size() == 2);
    CHECK(two.points[0].report.metric == MetricKind::RmseGridAll);
    // The first point is the same plain run in both curves.
    CHECK(two.points[0].report.mean_error_db == one.points[0].report.mean_error_db);
    cfg.k_values = {2, 1};
    CHECK_THROWS_AS(learning_curve(train, test, NetworkWeights::random(2, 3), cfg), std::invalid_argument);
    cfg.k_values = {3};
    CHECK_THROWS_AS(learning_curve(train, test, NetworkWeights::random(2, 3), cfg), std::invalid_argument);
}

TEST_SUITE_END();
