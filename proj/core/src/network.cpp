// SPDX-License-Identifier: Apache-2.0

#include "rme/network.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "rme/random.hpp"

namespace rme {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstKernelMap = Eigen::Map<const RowMatrix>;
using KernelMap = Eigen::Map<RowMatrix>;

constexpr char kMagic[5] = {'R', 'M', 'E', 'W', '1'};

// Gathers 3x3 patches ("same" zero padding) into columns: row c*9 + ky*3 + kx,
// column oy * out_cols + ox.
Matrix im2col(const Matrix& in, std::size_t rows, std::size_t cols, std::size_t stride) {
    const std::size_t channels = static_cast<std::size_t>(in.rows());
    const std::size_t out_rows = rows / stride;
    const std::size_t out_cols = cols / stride;
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(channels * 9),
                              static_cast<Eigen::Index>(out_rows * out_cols));
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t ky = 0; ky < 3; ++ky)
            for (std::size_t kx = 0; kx < 3; ++kx) {
                const auto r = static_cast<Eigen::Index>(c * 9 + ky * 3 + kx);
                for (std::size_t oy = 0; oy < out_rows; ++oy) {
                    const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy * stride + ky) - 1;
                    if (y < 0 || y >= static_cast<std::ptrdiff_t>(rows)) continue;
                    for (std::size_t ox = 0; ox < out_cols; ++ox) {
                        const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(ox * stride + kx) - 1;
                        if (x < 0 || x >= static_cast<std::ptrdiff_t>(cols)) continue;
                        out(r, static_cast<Eigen::Index>(oy * out_cols + ox)) =
                            in(static_cast<Eigen::Index>(c),
                               static_cast<Eigen::Index>(static_cast<std::size_t>(y) * cols +
                                                         static_cast<std::size_t>(x)));
                    }
                }
            }
    return out;
}

// Adjoint of im2col.
Matrix col2im(const Matrix& col, std::size_t channels, std::size_t rows, std::size_t cols,
              std::size_t stride) {
    const std::size_t out_rows = rows / stride;
    const std::size_t out_cols = cols / stride;
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(rows * cols));
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t ky = 0; ky < 3; ++ky)
            for (std::size_t kx = 0; kx < 3; ++kx) {
                const auto r = static_cast<Eigen::Index>(c * 9 + ky * 3 + kx);
                for (std::size_t oy = 0; oy < out_rows; ++oy) {
                    const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy * stride + ky) - 1;
                    if (y < 0 || y >= static_cast<std::ptrdiff_t>(rows)) continue;
                    for (std::size_t ox = 0; ox < out_cols; ++ox) {
                        const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(ox * stride + kx) - 1;
                        if (x < 0 || x >= static_cast<std::ptrdiff_t>(cols)) continue;
                        out(static_cast<Eigen::Index>(c),
                            static_cast<Eigen::Index>(static_cast<std::size_t>(y) * cols +
                                                      static_cast<std::size_t>(x))) +=
                            col(r, static_cast<Eigen::Index>(oy * out_cols + ox));
                    }
                }
            }
    return out;
}

Matrix upsample2(const Matrix& in, std::size_t rows, std::size_t cols) {
    Matrix out(in.rows(), static_cast<Eigen::Index>(4 * rows * cols));
    for (Eigen::Index c = 0; c < in.rows(); ++c)
        for (std::size_t y = 0; y < 2 * rows; ++y)
            for (std::size_t x = 0; x < 2 * cols; ++x)
                out(c, static_cast<Eigen::Index>(y * 2 * cols + x)) =
                    in(c, static_cast<Eigen::Index>((y / 2) * cols + x / 2));
    return out;
}

// Adjoint of upsample2: sums each 2x2 block.
Matrix upsample2_adjoint(const Matrix& grad, std::size_t rows, std::size_t cols) {
    Matrix out = Matrix::Zero(grad.rows(), static_cast<Eigen::Index>(rows * cols));
    for (Eigen::Index c = 0; c < grad.rows(); ++c)
        for (std::size_t y = 0; y < 2 * rows; ++y)
            for (std::size_t x = 0; x < 2 * cols; ++x)
                out(c, static_cast<Eigen::Index>((y / 2) * cols + x / 2)) +=
                    grad(c, static_cast<Eigen::Index>(y * 2 * cols + x));
    return out;
}

Matrix leaky(const Matrix& z) {
    return z.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
}

Matrix leaky_grad(const Matrix& z, const Matrix& upstream) {
    return upstream.binaryExpr(z, [](double g, double v) { return v > 0.0 ? g : kLeakySlope * g; });
}

struct Layer {
    const ConvShape& shape;
    ConstKernelMap kernel;
    Eigen::Map<const Vector> bias;
};

Layer layer_view(const NetworkWeights& w, std::size_t l) {
    const auto& s = w.shapes()[l];
    return {s,
            ConstKernelMap(w.params().data() + w.kernel_offset(l),
                           static_cast<Eigen::Index>(s.out_channels),
                           static_cast<Eigen::Index>(s.in_channels * 9)),
            Eigen::Map<const Vector>(w.params().data() + w.bias_offset(l),
                                     static_cast<Eigen::Index>(s.out_channels))};
}

struct ForwardCache {
    std::array<Matrix, NetworkWeights::kLayers> cols;  // im2col of each conv input
    std::array<Matrix, NetworkWeights::kLayers> pre;   // pre-activations
    Matrix output;
};

void check_input(const Tensor& input, const NetworkWeights& w) {
    if (input.channels != w.input_channels())
        throw std::invalid_argument(fmt::format("network expects {} input channels, got {}",
                                                w.input_channels(), input.channels));
    if (input.rows < 2 || input.cols < 2 || input.rows % 2 != 0 || input.cols % 2 != 0)
        throw std::invalid_argument(
            fmt::format("network needs even grid sides, got {} x {}", input.rows, input.cols));
    if (input.data.rows() != static_cast<Eigen::Index>(input.channels) ||
        input.data.cols() != static_cast<Eigen::Index>(input.rows * input.cols))
        throw std::invalid_argument("tensor storage does not match its shape");
}

ForwardCache forward(const Tensor& input, const NetworkWeights& w) {
    check_input(input, w);
    const std::size_t h = input.rows;
    const std::size_t wd = input.cols;
    ForwardCache cache;
    auto conv = [&](std::size_t l, const Matrix& x, std::size_t rows, std::size_t cols) {
        const auto layer = layer_view(w, l);
        cache.cols[l] = im2col(x, rows, cols, layer.shape.stride);
        cache.pre[l] = layer.kernel * cache.cols[l];
        cache.pre[l].colwise() += layer.bias;
        return cache.pre[l];
    };
    const Matrix a1 = leaky(conv(0, input.data, h, wd));
    const Matrix a2 = leaky(conv(1, a1, h, wd));
    const Matrix a3 = leaky(conv(2, a2, h / 2, wd / 2));
    const Matrix up = upsample2(a3, h / 2, wd / 2);
    const Matrix a4 = leaky(conv(3, up, h, wd));
    const Matrix z5 = conv(4, a4, h, wd);
    cache.output = Eigen::Map<const RowMatrix>(z5.data(), static_cast<Eigen::Index>(h),
                                               static_cast<Eigen::Index>(wd));
    return cache;
}

void backward(const ForwardCache& cache, const NetworkWeights& w, const Matrix& grad_output,
              std::size_t h, std::size_t wd, std::vector<double>& gradient) {
    gradient.assign(w.parameter_count(), 0.0);
    auto accumulate = [&](std::size_t l, const Matrix& g) {
        const auto& s = w.shapes()[l];
        KernelMap dk(gradient.data() + w.kernel_offset(l), static_cast<Eigen::Index>(s.out_channels),
                     static_cast<Eigen::Index>(s.in_channels * 9));
        dk = g * cache.cols[l].transpose();
        Eigen::Map<Vector>(gradient.data() + w.bias_offset(l), static_cast<Eigen::Index>(s.out_channels)) =
            g.rowwise().sum();
        return Matrix(layer_view(w, l).kernel.transpose() * g);
    };

    Matrix g5(1, static_cast<Eigen::Index>(h * wd));
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < wd; ++j)
            g5(0, static_cast<Eigen::Index>(i * wd + j)) =
                grad_output(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

    const Matrix d4 = col2im(accumulate(4, g5), 16, h, wd, 1);
    const Matrix g4 = leaky_grad(cache.pre[3], d4);
    const Matrix dup = col2im(accumulate(3, g4), 32, h, wd, 1);
    const Matrix d3 = upsample2_adjoint(dup, h / 2, wd / 2);
    const Matrix g3 = leaky_grad(cache.pre[2], d3);
    const Matrix d2 = col2im(accumulate(2, g3), 32, h / 2, wd / 2, 1);
    const Matrix g2 = leaky_grad(cache.pre[1], d2);
    const Matrix d1 = col2im(accumulate(1, g2), 16, h, wd, 2);
    const Matrix g1 = leaky_grad(cache.pre[0], d1);
    accumulate(0, g1);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& in) {
    std::array<unsigned char, 4> b{};
    in.read(reinterpret_cast<char*>(b.data()), 4);
    if (!in) throw std::runtime_error("truncated weights file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    std::array<char, 8> b{};
    for (auto& c : b) {
        c = static_cast<char>(bits & 0xff);
        bits >>= 8;
    }
    out.write(b.data(), 8);
}

double get_f64(std::istream& in) {
    std::array<unsigned char, 8> b{};
    in.read(reinterpret_cast<char*>(b.data()), 8);
    if (!in) throw std::runtime_error("truncated weights file");
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[static_cast<std::size_t>(i)];
    return std::bit_cast<double>(bits);
}

std::vector<ConvShape> architecture(std::size_t input_channels) {
    return {{16, input_channels, 3, 1}, {32, 16, 3, 2}, {32, 32, 3, 1}, {16, 32, 3, 1}, {1, 16, 3, 1}};
}

}  // namespace

Tensor Tensor::zeros(std::size_t channels, std::size_t rows, std::size_t cols) {
    return {channels, rows, cols,
            Matrix::Zero(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(rows * cols))};
}

Matrix Tensor::channel(std::size_t c) const {
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = at(c, i, j);
    return m;
}

void Tensor::set_channel(std::size_t c, const Matrix& m) {
    if (m.rows() != static_cast<Eigen::Index>(rows) || m.cols() != static_cast<Eigen::Index>(cols))
        throw std::invalid_argument("channel shape mismatch");
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            at(c, i, j) = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

NetworkWeights::NetworkWeights(std::vector<ConvShape> shapes) : shapes_(std::move(shapes)) {
    std::size_t total = 0;
    for (const auto& s : shapes_) {
        offsets_.push_back(total);
        total += s.weight_count() + s.out_channels;
    }
    params_.assign(total, 0.0);
}

NetworkWeights NetworkWeights::zeros(std::size_t input_channels) {
    if (input_channels == 0) throw std::invalid_argument("network needs at least one input channel");
    return NetworkWeights(architecture(input_channels));
}

NetworkWeights NetworkWeights::random(std::size_t input_channels, std::uint64_t seed) {
    auto w = zeros(input_channels);
    Rng rng(seed);
    for (std::size_t l = 0; l < w.shapes_.size(); ++l) {
        const auto& s = w.shapes_[l];
        const double fan_in = static_cast<double>(s.in_channels * s.kernel * s.kernel);
        const double bound = std::sqrt(6.0 / ((1.0 + kLeakySlope * kLeakySlope) * fan_in));
        for (std::size_t k = 0; k < s.weight_count(); ++k)
            w.params_[w.offsets_[l] + k] = uniform_real(rng, -bound, bound);
    }
    return w;
}

std::vector<bool> NetworkWeights::bias_mask() const {
    std::vector<bool> mask(params_.size(), false);
    for (std::size_t l = 0; l < shapes_.size(); ++l)
        for (std::size_t k = 0; k < shapes_[l].out_channels; ++k) mask[bias_offset(l) + k] = true;
    return mask;
}

void NetworkWeights::write(std::ostream& out) const {
    out.write(kMagic, sizeof(kMagic));
    put_u32(out, static_cast<std::uint32_t>(shapes_.size()));
    for (const auto& s : shapes_) {
        put_u32(out, static_cast<std::uint32_t>(s.out_channels));
        put_u32(out, static_cast<std::uint32_t>(s.in_channels));
        put_u32(out, static_cast<std::uint32_t>(s.kernel));
        put_u32(out, static_cast<std::uint32_t>(s.kernel));
    }
    for (const double v : params_) put_f64(out, v);
}

NetworkWeights NetworkWeights::read(std::istream& in) {
    char magic[sizeof(kMagic)] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a network weights file (bad magic)");
    const std::uint32_t layers = get_u32(in);
    if (layers != kLayers) throw std::runtime_error(fmt::format("expected {} layers, file has {}", kLayers, layers));
    std::vector<ConvShape> shapes;
    for (std::uint32_t l = 0; l < layers; ++l) {
        ConvShape s;
        s.out_channels = get_u32(in);
        s.in_channels = get_u32(in);
        s.kernel = get_u32(in);
        if (get_u32(in) != s.kernel) throw std::runtime_error("non-square kernels are not supported");
        shapes.push_back(s);
    }
    auto w = zeros(shapes.front().in_channels);
    for (std::size_t l = 0; l < kLayers; ++l) {
        const auto& want = w.shapes_[l];
        if (shapes[l].out_channels != want.out_channels || shapes[l].in_channels != want.in_channels ||
            shapes[l].kernel != want.kernel)
            throw std::runtime_error(fmt::format("layer {} shape does not match the architecture", l));
    }
    for (auto& v : w.params_) v = get_f64(in);
    return w;
}

void NetworkWeights::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    write(out);
    if (!out) throw std::runtime_error(fmt::format("failed writing '{}'", path.string()));
}

NetworkWeights NetworkWeights::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot open weights file '{}'", path.string()));
    return read(in);
}

Matrix network_forward(const Tensor& input, const NetworkWeights& weights) {
    return forward(input, weights).output;
}

std::vector<Matrix> network_preactivations(const Tensor& input, const NetworkWeights& weights) {
    auto cache = forward(input, weights);
    return {std::make_move_iterator(cache.pre.begin()), std::make_move_iterator(cache.pre.end())};
}

double masked_mse(const Matrix& output, const Matrix& target, const Mask& mask) {
    double s = 0.0;
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < output.rows(); ++i)
        for (Eigen::Index j = 0; j < output.cols(); ++j)
            if (mask(i, j) != 0) {
                const double e = output(i, j) - target(i, j);
                s += e * e;
                ++count;
            }
    return count == 0 ? 0.0 : s / static_cast<double>(count);
}

double masked_mse_gradient(const Tensor& input, const Matrix& target, const Mask& mask,
                           const NetworkWeights& weights, std::vector<double>& gradient) {
    const auto cache = forward(input, weights);
    if (target.rows() != cache.output.rows() || target.cols() != cache.output.cols() ||
        mask.rows() != target.rows() || mask.cols() != target.cols())
        throw std::invalid_argument("target shape does not match the network output");
    const auto count = static_cast<double>((mask.array() != 0).count());
    if (count == 0.0) {
        gradient.assign(weights.parameter_count(), 0.0);
        return 0.0;
    }
    const Matrix diff = cache.output - target;
    const Matrix weight = mask.cast<double>();
    const Matrix grad_out = (2.0 / count) * diff.cwiseProduct(weight);
    backward(cache, weights, grad_out, input.rows, input.cols, gradient);
    return diff.cwiseProduct(weight).squaredNorm() / count;
}

}  // namespace rme
