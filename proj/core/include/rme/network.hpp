// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale convolutional completion network with hand-written
// backpropagation.
//
// Architecture (all kernels 3x3, zero "same" padding, leaky ReLU slope 0.2):
//
//   conv(C_in -> 16) -> lrelu -> conv stride 2 (16 -> 32) -> lrelu
//   -> conv(32 -> 32) -> lrelu -> nearest 2x upsample
//   -> conv(32 -> 16) -> lrelu -> conv(16 -> 1)
//
// Grid sides must be even.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "rme/types.hpp"

namespace rme {

/// Channels x rows x cols activations; `data` holds one channel per row with
/// the spatial dimensions flattened row-major.
struct Tensor {
    std::size_t channels = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    Matrix data;

    static Tensor zeros(std::size_t channels, std::size_t rows, std::size_t cols);
    double& at(std::size_t c, std::size_t i, std::size_t j) {
        return data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i * cols + j));
    }
    double at(std::size_t c, std::size_t i, std::size_t j) const {
        return data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i * cols + j));
    }
    /// One channel as a rows x cols matrix.
    Matrix channel(std::size_t c) const;
    void set_channel(std::size_t c, const Matrix& m);
};

struct ConvShape {
    std::size_t out_channels = 0;
    std::size_t in_channels = 0;
    std::size_t kernel = 3;
    std::size_t stride = 1;

    std::size_t weight_count() const { return out_channels * in_channels * kernel * kernel; }
    friend bool operator==(const ConvShape&, const ConvShape&) = default;
};

inline constexpr double kLeakySlope = 0.2;

/// All trainable parameters in one flat vector. Layer l stores its kernel
/// (out x in x 3 x 3, row-major) followed by its bias (out).
class NetworkWeights {
public:
    static constexpr std::size_t kLayers = 5;

    static NetworkWeights zeros(std::size_t input_channels);
    /// Uniform fan-in initialization U(-b, b), b = sqrt(6 / ((1 + 0.2^2) fan_in));
    /// biases start at zero.
    static NetworkWeights random(std::size_t input_channels, std::uint64_t seed);

    std::size_t input_channels() const { return shapes_.front().in_channels; }
    const std::vector<ConvShape>& shapes() const { return shapes_; }
    std::size_t parameter_count() const { return params_.size(); }

    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    std::size_t kernel_offset(std::size_t layer) const { return offsets_[layer]; }
    std::size_t bias_offset(std::size_t layer) const {
        return offsets_[layer] + shapes_[layer].weight_count();
    }
    /// True where the flat parameter is a bias.
    std::vector<bool> bias_mask() const;

    /// Binary layout: "RMEW1", u32 layer count, per layer u32 {out, in, kh, kw},
    /// then every f64 parameter in flat order; all little-endian.
    void write(std::ostream& out) const;
    static NetworkWeights read(std::istream& in);
    void save(const std::filesystem::path& path) const;
    static NetworkWeights load(const std::filesystem::path& path);

    friend bool operator==(const NetworkWeights&, const NetworkWeights&) = default;

private:
    explicit NetworkWeights(std::vector<ConvShape> shapes);

    std::vector<ConvShape> shapes_;
    std::vector<std::size_t> offsets_;
    std::vector<double> params_;
};

/// Forward pass. Throws std::invalid_argument on channel-count or shape
/// mismatch (odd grid sides).
Matrix network_forward(const Tensor& input, const NetworkWeights& weights);

/// Pre-activations of every layer (channels x flattened pixels), in layer
/// order; the last entry is the raw output.
std::vector<Matrix> network_preactivations(const Tensor& input, const NetworkWeights& weights);

/// Forward pass plus the gradient of the mean squared error over entries where
/// `mask` is set. Returns the loss; `gradient` is resized to the parameter
/// count and overwritten. An empty mask gives zero loss and gradient.
double masked_mse_gradient(const Tensor& input, const Matrix& target, const Mask& mask,
                           const NetworkWeights& weights, std::vector<double>& gradient);

double masked_mse(const Matrix& output, const Matrix& target, const Mask& mask);

}  // namespace rme
