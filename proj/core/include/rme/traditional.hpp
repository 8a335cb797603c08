// SPDX-License-Identifier: Apache-2.0
//
// Function-regression estimators: K nearest neighbors, simple Kriging and
// kernel ridge regression. They take scattered observations and can be
// evaluated anywhere.

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "rme/estimator.hpp"
#include "rme/linalg.hpp"

namespace rme {

struct KnnParams {
    std::size_t k = 5;
};

struct KrigingParams {
    double shadow_variance = 0.51 * 0.51;  // dB^2
    double shadow_half_distance = 300.0;   // m
    double noise_variance = 1.0;           // dB^2
};

enum class KernelKind { Gaussian, Laplacian };

std::string_view to_string(KernelKind kind);
KernelKind kernel_kind_from_string(std::string_view name);

struct KrrParams {
    double regularization = 1e-3;
    KernelKind kernel = KernelKind::Gaussian;
    /// m^2 for the Gaussian kernel exp(-d^2 / w), m for the Laplacian exp(-d / w).
    double width = 50.0;
};

// --- K nearest neighbors ---------------------------------------------------

/// Mean power of the k observations nearest to `query`; equal distances are
/// ordered by observation index. Throws std::invalid_argument if k is 0 or
/// exceeds the observation count.
double knn_estimate(std::span<const Measurement> obs, const KnnParams& params, const Location& query);

/// Observation indices sorted by distance to `query` (ties by index).
std::vector<std::size_t> neighbor_order(std::span<const Measurement> obs, const Location& query);

// --- Simple Kriging --------------------------------------------------------

/// LMMSE interpolator under the Gudmundson covariance, centered at the sample
/// mean of the observations.
class KrigingModel {
public:
    KrigingModel(std::span<const Measurement> obs, const KrigingParams& params);

    double predict(const Location& query) const;
    double mean() const { return mean_; }
    double jitter() const { return jitter_; }

private:
    std::vector<Location> locs_;
    KrigingParams params_;
    double mean_ = 0.0;
    Vector weights_;  // C^-1 (p - mean)
    double jitter_ = 0.0;
};

double kriging_estimate(std::span<const Measurement> obs, const KrigingParams& params,
                        const Location& query);

// --- Kernel ridge regression -----------------------------------------------

double kernel_value(KernelKind kind, double width, double squared_distance);

/// Gram matrix of `a` against `b`.
Matrix kernel_matrix(KernelKind kind, double width, std::span<const Location> a,
                     std::span<const Location> b);

/// Minimizer of (1/N) |y - K alpha|^2 + lambda |alpha|^2 for symmetric K, i.e.
/// the solution of (K^T K + N lambda I) alpha = K^T y. Solved through the
/// eigendecomposition of K. Requires lambda > 0.
Vector krr_coefficients(const Matrix& gram, const Vector& targets, double regularization);

class KrrModel {
public:
    /// Fits alpha on the observed powers centered by their sample mean.
    KrrModel(std::span<const Measurement> obs, const KrrParams& params);

    double predict(const Location& query) const;
    const Vector& coefficients() const { return alpha_; }
    double mean() const { return mean_; }

private:
    std::vector<Location> locs_;
    KrrParams params_;
    double mean_ = 0.0;
    Vector alpha_;
};

/// Coefficients alpha of the fitted KRR model (see KrrModel).
Vector krr_fit(std::span<const Measurement> obs, const KrrParams& params);

// --- Estimator adapters ----------------------------------------------------

/// Uses min(k, observation count) neighbors.
class KnnEstimator final : public Estimator {
public:
    explicit KnnEstimator(KnnParams p) : params_(p) {}
    std::string id() const override { return "knn"; }
    MapEstimate estimate(const ObservedData& data) const override;
    const KnnParams& params() const { return params_; }

private:
    KnnParams params_;
};

class KrigingEstimator final : public Estimator {
public:
    explicit KrigingEstimator(KrigingParams p) : params_(p) {}
    std::string id() const override { return "kriging"; }
    MapEstimate estimate(const ObservedData& data) const override;
    const KrigingParams& params() const { return params_; }

private:
    KrigingParams params_;
};

class KrrEstimator final : public Estimator {
public:
    explicit KrrEstimator(KrrParams p) : params_(p) {}
    std::string id() const override { return "krr"; }
    MapEstimate estimate(const ObservedData& data) const override;
    const KrrParams& params() const { return params_; }

private:
    KrrParams params_;
};

}  // namespace rme
