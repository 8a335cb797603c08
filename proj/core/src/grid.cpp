// SPDX-License-Identifier: Apache-2.0

#include "rme/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace rme {

Location grid_point_location(const GridSpec& spec, std::size_t i, std::size_t j) {
    if (i < 1 || i > spec.n_rows || j < 1 || j > spec.n_cols)
        throw std::out_of_range(fmt::format("grid index ({}, {}) outside {} x {} grid", i, j,
                                            spec.n_rows, spec.n_cols));
    return {spec.origin.x + spec.spacing * static_cast<double>(j - 1),
            spec.origin.y + spec.spacing * static_cast<double>(spec.n_rows - i)};
}

namespace {

// 0-based step count along one axis. A point exactly halfway between two grid
// lines goes to the lower one when `half_goes_up` is false.
std::size_t nearest_step(double offset, double spacing, std::size_t count, bool half_goes_up) {
    const double f = offset / spacing;
    if (!(f > 0.0)) return 0;
    const double base = std::floor(f);
    const double frac = f - base;
    double k = base;
    if (frac > 0.5 || (half_goes_up && frac == 0.5)) k += 1.0;
    if (k >= static_cast<double>(count - 1)) return count - 1;
    return static_cast<std::size_t>(k);
}

}  // namespace

GridIndex nearest_grid_point(const GridSpec& spec, const Location& p) {
    // Axis-aligned grid: the Euclidean nearest point is the nearest column
    // combined with the nearest row. Ties prefer the smaller column and the
    // smaller row index (larger y).
    const std::size_t col = nearest_step(p.x - spec.origin.x, spec.spacing, spec.n_cols, false);
    const std::size_t up = nearest_step(p.y - spec.origin.y, spec.spacing, spec.n_rows, true);
    return {spec.n_rows - up, col + 1};
}

GridSpec patch_grid_spec(const Location& corner, double side, double spacing) {
    if (!(spacing > 0.0) || !(side > 0.0))
        throw std::invalid_argument("patch side and grid spacing must be positive");
    const double ratio = side / spacing;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument(
            fmt::format("patch side {} is not an integer multiple of spacing {}", side, spacing));
    GridSpec spec;
    spec.n_rows = spec.n_cols = static_cast<std::size_t>(n);
    spec.spacing = spacing;
    spec.origin = corner;
    return spec;
}

double combine(std::span<const double> powers_db, CombiningMode mode) {
    if (powers_db.empty()) throw std::invalid_argument("cannot combine an empty list");
    // Constant lists come back unchanged, without a dB round trip.
    if (std::all_of(powers_db.begin(), powers_db.end(),
                    [&](double p) { return p == powers_db.front(); }))
        return powers_db.front();
    const bool natural = mode == CombiningMode::NaturalMean || mode == CombiningMode::NaturalMedian;
    std::vector<double> v(powers_db.begin(), powers_db.end());
    if (natural) std::transform(v.begin(), v.end(), v.begin(), db_to_linear);

    double out = 0.0;
    if (mode == CombiningMode::NaturalMean || mode == CombiningMode::DbMean) {
        out = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    } else {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        out = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }
    return natural ? linear_to_db(out) : out;
}

std::vector<std::size_t> assign_to_grid(std::span<const Measurement> measurements,
                                        const GridSpec& spec) {
    spec.validate();
    std::vector<std::size_t> out;
    out.reserve(measurements.size());
    for (const auto& m : measurements) out.push_back(flat_index(spec, nearest_grid_point(spec, m.loc)));
    return out;
}

QuantizedGrid quantize(std::span<const Measurement> measurements, const GridSpec& spec,
                       CombiningMode mode) {
    spec.validate();
    QuantizedGrid grid;
    grid.spec = spec;
    grid.values = Matrix::Zero(static_cast<Eigen::Index>(spec.n_rows),
                               static_cast<Eigen::Index>(spec.n_cols));
    grid.mask = Mask::Zero(grid.values.rows(), grid.values.cols());

    const auto cells = assign_to_grid(measurements, spec);
    std::vector<std::vector<double>> buckets(spec.size());
    for (std::size_t n = 0; n < cells.size(); ++n) buckets[cells[n]].push_back(measurements[n].power_db);

    for (std::size_t flat = 0; flat < buckets.size(); ++flat) {
        if (buckets[flat].empty()) continue;
        const auto r = static_cast<Eigen::Index>(flat / spec.n_cols);
        const auto c = static_cast<Eigen::Index>(flat % spec.n_cols);
        grid.values(r, c) = combine(buckets[flat], mode);
        grid.mask(r, c) = 1;
    }
    return grid;
}

QuantizedGrid quantize(const EstimationInstance& instance, const GridSpec& spec,
                       CombiningMode mode) {
    return quantize(std::span<const Measurement>(instance.measurements), spec, mode);
}

std::vector<std::size_t> occupied_entries(const QuantizedGrid& grid) {
    std::vector<std::size_t> out;
    const auto cols = static_cast<std::size_t>(grid.mask.cols());
    for (Eigen::Index r = 0; r < grid.mask.rows(); ++r)
        for (Eigen::Index c = 0; c < grid.mask.cols(); ++c)
            if (grid.mask(r, c) != 0)
                out.push_back(static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c));
    return out;
}

QuantizedGrid restrict_grid(const QuantizedGrid& grid, std::span<const std::size_t> keep) {
    QuantizedGrid out;
    out.spec = grid.spec;
    out.values = Matrix::Zero(grid.values.rows(), grid.values.cols());
    out.mask = Mask::Zero(grid.mask.rows(), grid.mask.cols());
    const auto cols = static_cast<std::size_t>(grid.values.cols());
    for (const auto flat : keep) {
        const auto r = static_cast<Eigen::Index>(flat / cols);
        const auto c = static_cast<Eigen::Index>(flat % cols);
        out.values(r, c) = grid.values(r, c);
        out.mask(r, c) = grid.mask(r, c);
    }
    return out;
}

std::vector<Location> grid_locations(const GridSpec& spec) {
    std::vector<Location> out;
    out.reserve(spec.size());
    for (std::size_t i = 1; i <= spec.n_rows; ++i)
        for (std::size_t j = 1; j <= spec.n_cols; ++j) out.push_back(grid_point_location(spec, i, j));
    return out;
}

}  // namespace rme
