// SPDX-License-Identifier: Apache-2.0

#include "rme/deep.hpp"

#include <algorithm>
#include <stdexcept>

#include "rme/grid.hpp"
#include "rme/sampling.hpp"

namespace rme {

Tensor cnn_input(const QuantizedGrid& observed) {
    Tensor t = Tensor::zeros(2, observed.spec.n_rows, observed.spec.n_cols);
    t.set_channel(0, observed.values);
    t.set_channel(1, observed.mask.cast<double>());
    return t;
}

Tensor frade_input(const QuantizedGrid& observed, std::span<const Measurement> observed_raw,
                   const KnnParams& knn, const KrigingParams& kriging, const KrrParams& krr) {
    if (observed_raw.empty()) throw std::invalid_argument("FRADE needs at least one observation");
    const auto& spec = observed.spec;
    Tensor t = Tensor::zeros(5, spec.n_rows, spec.n_cols);
    t.set_channel(0, observed.values);
    t.set_channel(1, observed.mask.cast<double>());

    const KnnParams knn_used{std::min(knn.k, observed_raw.size())};
    const KrigingModel kriging_model(observed_raw, kriging);
    const KrrModel krr_model(observed_raw, krr);
    for (std::size_t i = 1; i <= spec.n_rows; ++i)
        for (std::size_t j = 1; j <= spec.n_cols; ++j) {
            const auto x = grid_point_location(spec, i, j);
            t.at(2, i - 1, j - 1) = knn_estimate(observed_raw, knn_used, x);
            t.at(3, i - 1, j - 1) = kriging_model.predict(x);
            t.at(4, i - 1, j - 1) = krr_model.predict(x);
        }
    return t;
}

Tensor frade_assemble_input(const EstimationInstance& instance, const ObservationSplit& split,
                            const GridSpec& spec, const KnnParams& knn, const KrigingParams& kriging,
                            const KrrParams& krr) {
    const auto observed = select(instance.measurements, split.obs);
    return frade_input(quantize(observed, spec), observed, knn, kriging, krr);
}

NormalizedInput normalize_input(const Tensor& raw) {
    if (raw.channels < 2) throw std::invalid_argument("network input needs value and mask channels");
    NormalizedInput out{raw, 0.0};
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < raw.rows; ++i)
        for (std::size_t j = 0; j < raw.cols; ++j)
            if (raw.at(1, i, j) != 0.0) {
                sum += raw.at(0, i, j);
                ++count;
            }
    out.offset = count > 0 ? sum / static_cast<double>(count) : 0.0;
    for (std::size_t i = 0; i < raw.rows; ++i)
        for (std::size_t j = 0; j < raw.cols; ++j) {
            const double m = raw.at(1, i, j);
            out.tensor.at(0, i, j) = m != 0.0 ? (raw.at(0, i, j) - out.offset) / kNetworkScale : 0.0;
            for (std::size_t c = 2; c < raw.channels; ++c)
                out.tensor.at(c, i, j) = (raw.at(c, i, j) - out.offset) / kNetworkScale;
        }
    return out;
}

Matrix denormalize_output(const Matrix& output, double offset) {
    return (kNetworkScale * output).array() + offset;
}

NetworkEstimator::NetworkEstimator(NetworkWeights weights) : weights_(std::move(weights)) {
    if (weights_.input_channels() != 2)
        throw std::invalid_argument("the plain network estimator needs 2-channel weights");
}

MapEstimate NetworkEstimator::estimate(const ObservedData& data) const {
    const auto input = normalize_input(cnn_input(data.grid));
    return MapEstimate::from_grid(denormalize_output(network_forward(input.tensor, weights_), input.offset),
                                  data.grid.spec);
}

FradeEstimator::FradeEstimator(TraditionalParams traditional, NetworkWeights weights)
    : traditional_(traditional), weights_(std::move(weights)) {
    if (weights_.input_channels() != 5)
        throw std::invalid_argument("FRADE needs 5-channel weights");
}

MapEstimate FradeEstimator::estimate(const ObservedData& data) const {
    const auto raw = frade_input(data.grid, data.raw, traditional_.knn, traditional_.kriging,
                                 traditional_.krr);
    const auto input = normalize_input(raw);
    return MapEstimate::from_grid(denormalize_output(network_forward(input.tensor, weights_), input.offset),
                                  data.grid.spec);
}

}  // namespace rme
