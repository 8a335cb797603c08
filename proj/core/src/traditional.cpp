// SPDX-License-Identifier: Apache-2.0

#include "rme/traditional.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace rme {

namespace {

double mean_power(std::span<const Measurement> obs) {
    double s = 0.0;
    for (const auto& m : obs) s += m.power_db;
    return s / static_cast<double>(obs.size());
}

std::vector<Location> locations_of(std::span<const Measurement> obs) {
    std::vector<Location> out;
    out.reserve(obs.size());
    for (const auto& m : obs) out.push_back(m.loc);
    return out;
}

void require_observations(std::span<const Measurement> obs) {
    if (obs.empty()) throw std::invalid_argument("estimator needs at least one observation");
}

}  // namespace

std::string_view to_string(KernelKind kind) {
    return kind == KernelKind::Gaussian ? "gaussian" : "laplacian";
}

KernelKind kernel_kind_from_string(std::string_view name) {
    if (name == "gaussian") return KernelKind::Gaussian;
    if (name == "laplacian") return KernelKind::Laplacian;
    throw std::invalid_argument(fmt::format("unknown kernel '{}'", name));
}

// --- K-NN ------------------------------------------------------------------

std::vector<std::size_t> neighbor_order(std::span<const Measurement> obs, const Location& query) {
    std::vector<std::size_t> idx(obs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<double> d2(obs.size());
    for (std::size_t n = 0; n < obs.size(); ++n) d2[n] = squared_distance(obs[n].loc, query);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d2[a] < d2[b]; });
    return idx;
}

double knn_estimate(std::span<const Measurement> obs, const KnnParams& params, const Location& query) {
    if (params.k == 0 || params.k > obs.size())
        throw std::invalid_argument(
            fmt::format("k = {} must be between 1 and the {} observations", params.k, obs.size()));
    std::vector<std::size_t> idx(obs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<double> d2(obs.size());
    for (std::size_t n = 0; n < obs.size(); ++n) d2[n] = squared_distance(obs[n].loc, query);
    const auto closer = [&](std::size_t a, std::size_t b) {
        return d2[a] < d2[b] || (d2[a] == d2[b] && a < b);
    };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(params.k), idx.end(), closer);
    double s = 0.0;
    for (std::size_t r = 0; r < params.k; ++r) s += obs[idx[r]].power_db;
    return s / static_cast<double>(params.k);
}

MapEstimate KnnEstimator::estimate(const ObservedData& data) const {
    auto obs = point_observations(data);
    require_observations(obs);
    if (params_.k == 0) throw std::invalid_argument("k must be at least 1");
    const KnnParams used{std::min(params_.k, obs.size())};
    return MapEstimate::from_function(
        [obs = std::move(obs), used](const Location& x) { return knn_estimate(obs, used, x); });
}

// --- Kriging ---------------------------------------------------------------

KrigingModel::KrigingModel(std::span<const Measurement> obs, const KrigingParams& params)
    : locs_(locations_of(obs)), params_(params) {
    require_observations(obs);
    if (!(params.shadow_variance >= 0.0) || !(params.noise_variance >= 0.0) ||
        !(params.shadow_half_distance > 0.0))
        throw std::invalid_argument("invalid Kriging parameters");
    const auto n = static_cast<Eigen::Index>(obs.size());
    mean_ = mean_power(obs);

    Matrix cov(n, n);
    Vector centered(n);
    for (Eigen::Index a = 0; a < n; ++a) {
        centered[a] = obs[static_cast<std::size_t>(a)].power_db - mean_;
        for (Eigen::Index b = 0; b <= a; ++b) {
            const double d = distance(locs_[static_cast<std::size_t>(a)], locs_[static_cast<std::size_t>(b)]);
            cov(a, b) = cov(b, a) = params.shadow_variance * std::exp2(-d / params.shadow_half_distance);
        }
        cov(a, a) += params.noise_variance;
    }
    const JitteredCholesky chol(cov);
    jitter_ = chol.jitter();
    weights_ = chol.solve(centered);
}

double KrigingModel::predict(const Location& query) const {
    double s = 0.0;
    for (std::size_t n = 0; n < locs_.size(); ++n)
        s += params_.shadow_variance * std::exp2(-distance(query, locs_[n]) / params_.shadow_half_distance) *
             weights_[static_cast<Eigen::Index>(n)];
    return mean_ + s;
}

double kriging_estimate(std::span<const Measurement> obs, const KrigingParams& params,
                        const Location& query) {
    return KrigingModel(obs, params).predict(query);
}

MapEstimate KrigingEstimator::estimate(const ObservedData& data) const {
    auto model = std::make_shared<const KrigingModel>(point_observations(data), params_);
    return MapEstimate::from_function([model](const Location& x) { return model->predict(x); });
}

// --- KRR -------------------------------------------------------------------

double kernel_value(KernelKind kind, double width, double squared_distance) {
    return kind == KernelKind::Gaussian ? std::exp(-squared_distance / width)
                                        : std::exp(-std::sqrt(squared_distance) / width);
}

Matrix kernel_matrix(KernelKind kind, double width, std::span<const Location> a,
                     std::span<const Location> b) {
    Matrix k(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                kernel_value(kind, width, squared_distance(a[i], b[j]));
    return k;
}

Vector krr_coefficients(const Matrix& gram, const Vector& targets, double regularization) {
    if (!(regularization > 0.0)) throw std::invalid_argument("KRR regularization must be positive");
    if (gram.rows() != gram.cols() || gram.rows() != targets.size())
        throw std::invalid_argument("KRR Gram matrix and targets disagree in size");
    // K = Q diag(e) Q^T  =>  (K^2 + N lambda I)^-1 K = Q diag(e / (e^2 + N lambda)) Q^T.
    const double shift = static_cast<double>(targets.size()) * regularization;
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    if (eig.info() != Eigen::Success) throw NumericalError("KRR eigendecomposition failed");
    const Vector& e = eig.eigenvalues();
    const Vector gain = e.array() / (e.array().square() + shift);
    return eig.eigenvectors() * (gain.asDiagonal() * (eig.eigenvectors().transpose() * targets));
}

KrrModel::KrrModel(std::span<const Measurement> obs, const KrrParams& params)
    : locs_(locations_of(obs)), params_(params) {
    require_observations(obs);
    if (!(params.width > 0.0)) throw std::invalid_argument("KRR kernel width must be positive");
    mean_ = mean_power(obs);
    Vector y(static_cast<Eigen::Index>(obs.size()));
    for (std::size_t n = 0; n < obs.size(); ++n) y[static_cast<Eigen::Index>(n)] = obs[n].power_db - mean_;
    alpha_ = krr_coefficients(kernel_matrix(params.kernel, params.width, locs_, locs_), y,
                              params.regularization);
}

double KrrModel::predict(const Location& query) const {
    double s = 0.0;
    for (std::size_t n = 0; n < locs_.size(); ++n)
        s += alpha_[static_cast<Eigen::Index>(n)] *
             kernel_value(params_.kernel, params_.width, squared_distance(query, locs_[n]));
    return mean_ + s;
}

Vector krr_fit(std::span<const Measurement> obs, const KrrParams& params) {
    return KrrModel(obs, params).coefficients();
}

MapEstimate KrrEstimator::estimate(const ObservedData& data) const {
    auto model = std::make_shared<const KrrModel>(point_observations(data), params_);
    return MapEstimate::from_function([model](const Location& x) { return model->predict(x); });
}

}  // namespace rme
