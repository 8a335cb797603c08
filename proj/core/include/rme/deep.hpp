// SPDX-License-Identifier: Apache-2.0
//
// Grid-aware network estimators: the plain completion network fed with the
// quantized measurements and mask, and FRADE, which additionally receives
// K-NN, Kriging and KRR estimates on the grid.

#pragma once

#include <span>

#include "rme/estimator.hpp"
#include "rme/network.hpp"
#include "rme/traditional.hpp"

namespace rme {

/// Raw two-channel input [M, B].
Tensor cnn_input(const QuantizedGrid& observed);

/// Raw five-channel input [M, B, K-NN, Kriging, KRR]. The point estimators are
/// fitted on the plain observed measurements and evaluated at every grid
/// point. K-NN uses min(k, observation count) neighbors.
Tensor frade_input(const QuantizedGrid& observed, std::span<const Measurement> observed_raw,
                   const KnnParams& knn, const KrigingParams& kriging, const KrrParams& krr);

/// Five-channel input for the observed part of `instance` under `split`.
Tensor frade_assemble_input(const EstimationInstance& instance, const ObservationSplit& split,
                            const GridSpec& spec, const KnnParams& knn, const KrigingParams& kriging,
                            const KrrParams& krr);

/// dB scale used to bring network inputs and outputs to unit range.
inline constexpr double kNetworkScale = 10.0;

/// Network-ready input: dB channels are centered on the mean observed value
/// `offset` and divided by kNetworkScale; channel 0 is re-masked and channel 1
/// (the mask) passes through.
struct NormalizedInput {
    Tensor tensor;
    double offset = 0.0;
};

NormalizedInput normalize_input(const Tensor& raw);

/// offset + kNetworkScale * output.
Matrix denormalize_output(const Matrix& output, double offset);

class NetworkEstimator final : public Estimator {
public:
    explicit NetworkEstimator(NetworkWeights weights);
    std::string id() const override { return "cnn"; }
    MapEstimate estimate(const ObservedData& data) const override;
    const NetworkWeights& weights() const { return weights_; }

private:
    NetworkWeights weights_;
};

struct TraditionalParams {
    KnnParams knn;
    KrigingParams kriging;
    KrrParams krr;
};

class FradeEstimator final : public Estimator {
public:
    FradeEstimator(TraditionalParams traditional, NetworkWeights weights);
    std::string id() const override { return "frade"; }
    MapEstimate estimate(const ObservedData& data) const override;
    const NetworkWeights& weights() const { return weights_; }
    const TraditionalParams& traditional() const { return traditional_; }

private:
    TraditionalParams traditional_;
    NetworkWeights weights_;
};

}  // namespace rme
