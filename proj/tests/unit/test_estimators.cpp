// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "rme/deep.hpp"
#include "rme/grid.hpp"
#include "rme/sampling.hpp"
#include "rme/traditional.hpp"
#include "support.hpp"

using namespace rme;
using doctest::Approx;

namespace {

const std::vector<Measurement> kFixture{
    {{0.0, 0.0}, -60.0}, {{10.0, 2.0}, -65.5}, {{4.0, 9.0}, -58.25}, {{12.5, 11.0}, -70.0}};

Tensor random_tensor(std::size_t c, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Tensor t = Tensor::zeros(c, n, n);
    for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data.data()[i] = standard_normal(rng);
    return t;
}

}  // namespace

TEST_SUITE_BEGIN("estimators");

// --- K-NN ------------------------------------------------------------------

TEST_CASE("knn basic cases") {
    const std::vector<Measurement> obs{{{0, 0}, -50.0}, {{10, 0}, -60.0}, {{0, 30}, -90.0}};
    CHECK(knn_estimate(obs, {1}, {1, 1}) == -50.0);
    CHECK(knn_estimate(obs, {3}, {1, 1}) == Approx(-200.0 / 3.0));
    CHECK(knn_estimate(obs, {2}, {5, 0}) == Approx(-55.0));
    CHECK_THROWS_AS(knn_estimate(obs, {4}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(knn_estimate(obs, {0}, {1, 1}), std::invalid_argument);
    // Equidistant tie goes to the lower index.
    CHECK(knn_estimate(obs, {1}, {5, 0}) == -50.0);
}

TEST_CASE("knn neighbor order: first is nearest, last is farthest") {
    Rng rng(17);
    for (int t = 0; t < 200; ++t) {
        const auto obs = test::random_measurements(2 + t % 20, 30.0, rng);
        const Location q{uniform_real(rng, 0, 30), uniform_real(rng, 0, 30)};
        const auto order = neighbor_order(obs, q);
        for (const auto& m : obs) {
            CHECK(distance(obs[order.front()].loc, q) <= distance(m.loc, q));
            CHECK(distance(obs[order.back()].loc, q) >= distance(m.loc, q));
        }
    }
}

TEST_CASE("knn estimator clamps k to the observation count") {
    ObservedData d;
    d.raw = {{{0, 0}, -50.0}, {{1, 0}, -60.0}};
    const KnnEstimator e({5});
    CHECK(e.estimate(d).evaluate({0, 0}) == Approx(-55.0));
    CHECK(e.id() == "knn");
}

// --- Kriging ---------------------------------------------------------------

TEST_CASE("kriging matches the frozen dense LMMSE value") {
    const KrigingParams p{0.81, 50.0, 1.0};
    CHECK(kriging_estimate(kFixture, p, {3.0, 4.0}) == Approx(-63.035024031642877).epsilon(1e-12));
}

TEST_CASE("kriging matches the dense oracle on random instances") {
    Rng rng(23);
    for (int t = 0; t < 50; ++t) {
        const auto obs = test::random_measurements(3 + t % 18, 40.0, rng);
        const KrigingParams p{uniform_real(rng, 0.01, 10.0), uniform_real(rng, 5.0, 300.0), uniform_real(rng, 0.1, 2.0)};
        const Location q{uniform_real(rng, 0, 40), uniform_real(rng, 0, 40)};
        CHECK(std::abs(kriging_estimate(obs, p, q) - oracle::lmmse(obs, p.shadow_variance, p.shadow_half_distance,
                                                                    p.noise_variance, q)) <= 1e-9);
    }
}

TEST_CASE("noiseless kriging interpolates the observations") {
    const std::vector<Measurement> one{{{3, 3}, -61.5}};
    CHECK(kriging_estimate(one, {2.0, 50.0, 0.0}, {3, 3}) == Approx(-61.5).epsilon(1e-14));
    const KrigingModel m(kFixture, {4.0, 20.0, 0.0});
    for (const auto& o : kFixture) CHECK(std::abs(m.predict(o.loc) - o.power_db) <= 1e-8);
}

TEST_CASE("kriging far from data returns the sample mean") {
    const KrigingModel m(kFixture, {1.0, 1e-3, 1.0});
    CHECK(m.predict({500.0, 500.0}) == Approx(m.mean()));
    CHECK(m.mean() == Approx(-63.4375));
}

TEST_CASE("kriging shifts with a constant offset of the data") {
    auto shifted = kFixture;
    for (auto& m : shifted) m.power_db += 7.25;
    const KrigingParams p{3.0, 40.0, 0.5};
    for (const Location q : {Location{1, 1}, Location{8, 8}, Location{20, -3}})
        CHECK(kriging_estimate(shifted, p, q) == Approx(kriging_estimate(kFixture, p, q) + 7.25).epsilon(1e-12));
}

TEST_CASE("kriging needs positive-definite covariance") {
    // Duplicate locations with zero noise: singular without jitter.
    const std::vector<Measurement> dup{{{1, 1}, -50.0}, {{1, 1}, -52.0}};
    const KrigingModel m(dup, {1.0, 10.0, 0.0});
    CHECK(m.jitter() > 0.0);
    CHECK(std::isfinite(m.predict({2, 2})));
    CHECK_THROWS_AS(KrigingModel(dup, {1.0, -1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(KrigingModel(std::vector<Measurement>{}, {}), std::invalid_argument);
}

TEST_CASE("jittered Cholesky reports failure on indefinite input") {
    Matrix bad(2, 2);
    bad << 1.0, 0.0, 0.0, -1.0;
    CHECK_THROWS_AS(JitteredCholesky{bad}, NumericalError);
    Matrix ok = Matrix::Identity(3, 3);
    CHECK(JitteredCholesky(ok).jitter() == 0.0);
}

// --- KRR -------------------------------------------------------------------

TEST_CASE("krr frozen coefficients") {
    const KrrModel g(kFixture, {1e-3, KernelKind::Gaussian, 50.0});
    const std::vector<double> ga{2.7670386071238542, -2.3156759722321407, 6.8349799275690843, -7.6197672127244154};
    for (int i = 0; i < 4; ++i) CHECK(g.coefficients()[i] == Approx(ga[static_cast<std::size_t>(i)]).epsilon(1e-9));
    CHECK(g.predict({3.0, 4.0}) == Approx(-58.968310920358164).epsilon(1e-12));

    const KrrModel l(kFixture, {1e-3, KernelKind::Laplacian, 20.0});
    const std::vector<double> la{3.0561612458491973, -4.1769277732479919, 15.557509402333555, -15.165230570114893};
    for (int i = 0; i < 4; ++i) CHECK(l.coefficients()[i] == Approx(la[static_cast<std::size_t>(i)]).epsilon(1e-9));
    CHECK(l.predict({3.0, 4.0}) == Approx(-60.309814853599192).epsilon(1e-12));
}

TEST_CASE("krr single observation") {
    const std::vector<Measurement> one{{{2, 2}, -50.0}};
    // Centered target is zero, so alpha is zero and the estimate is the value.
    const auto a = krr_fit(one, {0.5, KernelKind::Gaussian, 10.0});
    CHECK(a[0] == 0.0);
    // Uncentered scalar system: (1 + lambda) alpha = y.
    Matrix k(1, 1);
    k << 1.0;
    Vector y(1);
    y << 3.0;
    CHECK(krr_coefficients(k, y, 0.5)[0] == Approx(2.0));
}

TEST_CASE("krr heavy regularization collapses to the mean") {
    const KrrModel m(kFixture, {1e6, KernelKind::Gaussian, 50.0});
    CHECK(m.coefficients().norm() < 1e-5);
    CHECK(m.predict({7, 7}) == Approx(m.mean()).epsilon(1e-6));
    CHECK_THROWS_AS(krr_fit(kFixture, {0.0, KernelKind::Gaussian, 50.0}), std::invalid_argument);
}

TEST_CASE("krr satisfies its normal equations") {
    Rng rng(31);
    for (int t = 0; t < 30; ++t) {
        const auto obs = test::random_measurements(2 + t % 25, 60.0, rng);
        const KrrParams p{std::pow(10.0, -uniform_real(rng, 1, 10)), t % 2 ? KernelKind::Gaussian : KernelKind::Laplacian,
                          uniform_real(rng, 20, 150)};
        std::vector<Location> locs;
        for (const auto& m : obs) locs.push_back(m.loc);
        const Matrix k = kernel_matrix(p.kernel, p.width, locs, locs);
        const KrrModel model(obs, p);
        Vector y(static_cast<Eigen::Index>(obs.size()));
        for (std::size_t i = 0; i < obs.size(); ++i) y[static_cast<Eigen::Index>(i)] = obs[i].power_db - model.mean();
        const double n = static_cast<double>(obs.size());
        const Vector lhs = (k.transpose() * k + n * p.regularization * Matrix::Identity(k.rows(), k.cols())) *
                           model.coefficients();
        const Vector rhs = k.transpose() * y;
        CHECK((lhs - rhs).norm() <= 1e-8 * std::max(rhs.norm(), 1e-300) + 1e-12);
    }
}

TEST_CASE("krr coefficients agree with gradient descent on the objective") {
    // Well-separated points keep the problem well conditioned.
    const std::vector<Measurement> obs{
        {{0, 0}, -60.0}, {{40, 0}, -64.0}, {{0, 40}, -57.0}, {{40, 40}, -71.0}, {{20, 20}, -62.5}};
    const KrrParams p{1e-2, KernelKind::Laplacian, 20.0};
    std::vector<Location> locs;
    for (const auto& m : obs) locs.push_back(m.loc);
    const Matrix k = kernel_matrix(p.kernel, p.width, locs, locs);
    const KrrModel model(obs, p);
    Vector y(5);
    for (int i = 0; i < 5; ++i) y[i] = obs[static_cast<std::size_t>(i)].power_db - model.mean();
    const Vector gd = oracle::krr_gradient_descent(k, y, p.regularization, 10000);
    CHECK((gd - model.coefficients()).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(oracle::krr_objective(k, y, p.regularization, model.coefficients()) <=
          oracle::krr_objective(k, y, p.regularization, gd) + 1e-12);
}

TEST_CASE("kernel values and names") {
    CHECK(kernel_value(KernelKind::Gaussian, 50.0, 100.0) == Approx(std::exp(-2.0)));
    CHECK(kernel_value(KernelKind::Laplacian, 20.0, 400.0) == Approx(std::exp(-1.0)));
    CHECK(kernel_kind_from_string(to_string(KernelKind::Laplacian)) == KernelKind::Laplacian);
    CHECK_THROWS_AS(kernel_kind_from_string("rbf"), std::invalid_argument);
}

// --- estimator interface -----------------------------------------------------

TEST_CASE("grid-valued estimates are piecewise constant over cells") {
    GridSpec g{4, 4, 1.0, {0.0, 0.0}};
    Matrix v(4, 4);
    for (int i = 0; i < 16; ++i) v.data()[i] = i;
    const auto e = MapEstimate::from_grid(v, g);
    Rng rng(3);
    for (int t = 0; t < 500; ++t) {
        const Location p{uniform_real(rng, -0.4, 3.4), uniform_real(rng, -0.4, 3.4)};
        const auto idx = nearest_grid_point(g, p);
        CHECK(e.evaluate(p) == v(static_cast<Eigen::Index>(idx.row - 1), static_cast<Eigen::Index>(idx.col - 1)));
    }
    CHECK(e.on_grid(g) == v);
    CHECK_THROWS_AS(MapEstimate::from_grid(Matrix::Zero(3, 4), g), std::invalid_argument);
}

TEST_CASE("grid-aware point estimators use observed grid entries") {
    GridSpec g{2, 2, 1.0, {0.0, 0.0}};
    ObservedData d;
    d.raw = {{{0.1, 0.1}, -50.0}, {{0.2, 0.0}, -54.0}};
    d.grid = quantize(d.raw, g);
    d.grid_aware = true;
    const auto pts = point_observations(d);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].power_db == Approx(-52.0));
    CHECK(pts[0].loc.x == 0.0);
    d.grid_aware = false;
    CHECK(point_observations(d).size() == 2);
}

// --- network ---------------------------------------------------------------

TEST_CASE("network architecture and shapes") {
    const auto w2 = NetworkWeights::zeros(2);
    const auto w5 = NetworkWeights::zeros(5);
    CHECK(w2.shapes().size() == NetworkWeights::kLayers);
    CHECK(w2.parameter_count() == (16 * 2 * 9 + 16) + (32 * 16 * 9 + 32) + (32 * 32 * 9 + 32) + (16 * 32 * 9 + 16) + (16 * 9 + 1));
    CHECK(w5.parameter_count() == w2.parameter_count() + 16 * 3 * 9);
    CHECK(w2.bias_offset(0) == 16 * 2 * 9);

    const auto out = network_forward(random_tensor(2, 8, 1), w2);
    CHECK(out.rows() == 8);
    CHECK(out.isZero());
    CHECK_THROWS_AS(network_forward(random_tensor(5, 8, 1), w2), std::invalid_argument);
    CHECK_THROWS_AS(network_forward(random_tensor(2, 7, 1), w2), std::invalid_argument);
}

TEST_CASE("network forward is deterministic and finite") {
    const auto w = NetworkWeights::random(5, 9);
    const auto x = random_tensor(5, 16, 2);
    const Matrix a = network_forward(x, w);
    const Matrix b = network_forward(x, w);
    CHECK(a == b);
    CHECK(a.allFinite());
    CHECK(NetworkWeights::random(5, 9) == w);
    CHECK_FALSE(NetworkWeights::random(5, 10) == w);
}

TEST_CASE("network gradient matches central differences") {
    for (const std::size_t channels : {std::size_t{2}, std::size_t{5}}) {
        const auto x = random_tensor(channels, 16, 7);
        Rng rng(5);
        Matrix target(16, 16);
        Mask mask(16, 16);
        for (int i = 0; i < 256; ++i) {
            target.data()[i] = standard_normal(rng);
            mask.data()[i] = uniform_real(rng, 0, 1) < 0.6 ? 1 : 0;
        }
        const auto loss = [&](const NetworkWeights& v) { return masked_mse(network_forward(x, v), target, mask); };

        // Initial weights: pre-activation signs are mixed within channels, so a
        // tiny step keeps the stencils clear of the leaky ReLU kink.
        auto w = NetworkWeights::random(channels, 40 + channels);
        for (std::size_t l = 0; l < NetworkWeights::kLayers; ++l)
            for (std::size_t o = 0; o < w.shapes()[l].out_channels; ++o)
                w.params()[w.bias_offset(l) + o] = 0.1 * standard_normal(rng);
        std::vector<double> grad;
        const double value = masked_mse_gradient(x, target, mask, w, grad);
        CHECK(value == Approx(loss(w)).epsilon(1e-12));
        std::vector<std::size_t> which;
        for (std::size_t p = 0; p < w.parameter_count(); p += 23) which.push_back(p);
        for (std::size_t l = 0; l < NetworkWeights::kLayers; ++l) which.push_back(w.bias_offset(l));
        CHECK(oracle::worst_relative_error(w, grad, loss, which, 1e-7) <= 1e-3);

        // Inside one linear region the 1e-4 step is safe.
        CHECK(oracle::move_to_linear_region(w, x, 0.5) >= 0.5 - 1e-9);
        masked_mse_gradient(x, target, mask, w, grad);
        CHECK(oracle::worst_relative_error(w, grad, loss, which, 1e-4) <= 1e-3);
    }
}

TEST_CASE("masked loss ignores unmasked entries") {
    Matrix out = Matrix::Zero(2, 2), target(2, 2);
    target << 1.0, 2.0, 100.0, 100.0;
    Mask m(2, 2);
    m << 1, 1, 0, 0;
    CHECK(masked_mse(out, target, m) == Approx(2.5));
    CHECK(masked_mse(out, target, Mask::Zero(2, 2)) == 0.0);
}

TEST_CASE("weights binary round-trip and header") {
    const auto w = NetworkWeights::random(2, 77);
    std::stringstream s;
    w.write(s);
    const std::string bytes = s.str();
    CHECK(bytes.substr(0, 5) == "RMEW1");
    CHECK(bytes.size() == 5 + 4 + NetworkWeights::kLayers * 16 + 8 * w.parameter_count());
    CHECK(static_cast<unsigned char>(bytes[5]) == NetworkWeights::kLayers);
    // First layer dims {16, 2, 3, 3}, little-endian.
    CHECK(static_cast<unsigned char>(bytes[9]) == 16);
    CHECK(static_cast<unsigned char>(bytes[13]) == 2);
    const auto back = NetworkWeights::read(s);
    CHECK(back == w);

    std::stringstream bad("RMEW2xxxx");
    CHECK_THROWS(NetworkWeights::read(bad));
    std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS(NetworkWeights::read(truncated));
}

// --- FRADE -----------------------------------------------------------------

TEST_CASE("frade input channels") {
    const auto set = test::dense_set({19.2, 19.2}, 0.6, 12);
    const EstimationInstance inst{set.measurements(), {{0.0, 0.0}, 19.2}};
    const auto spec = patch_grid_spec({0.0, 0.0}, 19.2, 1.2);
    Rng rng(8);
    const auto split = split_uniform(inst, 30, rng);
    const KnnParams knn{4};
    const KrigingParams kr{2.0, 100.0, 1.0};
    const KrrParams krr{1e-3, KernelKind::Laplacian, 40.0};
    const auto t = frade_assemble_input(inst, split, spec, knn, kr, krr);
    const auto obs = select(inst.measurements, split.obs);
    const auto q = quantize(obs, spec);
    CHECK(t.channels == 5);
    CHECK(t.channel(0) == q.values);
    CHECK(t.channel(1) == q.mask.cast<double>());
    const KrigingModel km(obs, kr);
    const KrrModel rm(obs, krr);
    double worst = 0.0;
    for (std::size_t i = 1; i <= 16; ++i)
        for (std::size_t j = 1; j <= 16; ++j) {
            const auto x = grid_point_location(spec, i, j);
            worst = std::max(worst, std::abs(t.at(2, i - 1, j - 1) - knn_estimate(obs, knn, x)));
            worst = std::max(worst, std::abs(t.at(3, i - 1, j - 1) - km.predict(x)));
            worst = std::max(worst, std::abs(t.at(4, i - 1, j - 1) - rm.predict(x)));
        }
    CHECK(worst <= 1e-9);
}

TEST_CASE("frade with one observation has a constant knn channel") {
    const std::vector<Measurement> obs{{{3.0, 3.0}, -66.0}};
    const auto spec = patch_grid_spec({0.0, 0.0}, 9.6, 1.2);
    const auto t = frade_input(quantize(obs, spec), obs, {5}, {}, {});
    CHECK((t.channel(2).array() == -66.0).all());
    CHECK_THROWS_AS(frade_input(quantize(obs, spec), std::vector<Measurement>{}, {5}, {}, {}), std::invalid_argument);
}

TEST_CASE("network normalization round trip") {
    Tensor raw = Tensor::zeros(2, 2, 2);
    raw.at(0, 0, 0) = -60.0;
    raw.at(1, 0, 0) = 1.0;
    raw.at(0, 1, 1) = -70.0;
    raw.at(1, 1, 1) = 1.0;
    const auto n = normalize_input(raw);
    CHECK(n.offset == Approx(-65.0));
    CHECK(n.tensor.at(0, 0, 0) == Approx(0.5));
    CHECK(n.tensor.at(0, 0, 1) == 0.0);
    CHECK(n.tensor.at(1, 1, 1) == 1.0);
    const Matrix out = Matrix::Constant(2, 2, 0.25);
    CHECK(denormalize_output(out, n.offset)(0, 0) == Approx(-62.5));
}

TEST_CASE("network estimators reject mismatched weights") {
    CHECK_THROWS_AS(NetworkEstimator(NetworkWeights::zeros(5)), std::invalid_argument);
    CHECK_THROWS_AS(FradeEstimator({}, NetworkWeights::zeros(2)), std::invalid_argument);
    // Zero weights reproduce the observed mean everywhere.
    GridSpec g{4, 4, 1.0, {0.0, 0.0}};
    ObservedData d;
    d.raw = {{{0, 0}, -50.0}, {{3, 3}, -60.0}};
    d.grid = quantize(d.raw, g);
    const auto e = NetworkEstimator(NetworkWeights::zeros(2)).estimate(d);
    CHECK(e.evaluate({1, 1}) == Approx(-55.0));
}

TEST_SUITE_END();
