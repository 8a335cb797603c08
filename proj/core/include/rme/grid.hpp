// SPDX-License-Identifier: Apache-2.0
//
// Grid geometry and grid quantization of measurements.

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rme/types.hpp"

namespace rme {

/// 1-based grid index (row i counted from the top, column j from the left).
struct GridIndex {
    std::size_t row = 1;
    std::size_t col = 1;

    friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

/// Location of grid point (i, j): origin + [delta (j - 1), delta (N_y - i)].
/// Throws std::out_of_range for indices outside [1, N_y] x [1, N_x].
Location grid_point_location(const GridSpec& spec, std::size_t i, std::size_t j);

/// Nearest grid point in Euclidean distance. Ties go to the smallest (i, j) in
/// row-major order.
GridIndex nearest_grid_point(const GridSpec& spec, const Location& p);

/// Grid of side `side` whose point (N_y, 1) sits on `corner`.
/// Throws std::invalid_argument unless side / spacing is a positive integer.
GridSpec patch_grid_spec(const Location& corner, double side, double spacing);

/// Combines powers (dB) per `mode`. Natural modes operate on 10^(p/10).
/// Throws std::invalid_argument on an empty list.
double combine(std::span<const double> powers_db, CombiningMode mode);

/// Row-major flat index (0-based) of every measurement's nearest grid point.
std::vector<std::size_t> assign_to_grid(std::span<const Measurement> measurements,
                                        const GridSpec& spec);

/// Grid quantization: every measurement goes to its nearest grid point and the
/// measurements of each point are combined. Empty points get value 0, mask 0.
QuantizedGrid quantize(std::span<const Measurement> measurements, const GridSpec& spec,
                       CombiningMode mode = CombiningMode::DbMean);

QuantizedGrid quantize(const EstimationInstance& instance, const GridSpec& spec,
                       CombiningMode mode = CombiningMode::DbMean);

/// Flat (row-major, 0-based) indices of occupied entries in ascending order.
std::vector<std::size_t> occupied_entries(const QuantizedGrid& grid);

/// Copy of `grid` keeping only the listed flat entries; the rest are zeroed.
QuantizedGrid restrict_grid(const QuantizedGrid& grid, std::span<const std::size_t> keep);

/// Flat index <-> GridIndex conversions.
inline std::size_t flat_index(const GridSpec& spec, const GridIndex& g) {
    return (g.row - 1) * spec.n_cols + (g.col - 1);
}
inline GridIndex grid_index(const GridSpec& spec, std::size_t flat) {
    return {flat / spec.n_cols + 1, flat % spec.n_cols + 1};
}

/// All grid-point locations in row-major order.
std::vector<Location> grid_locations(const GridSpec& spec);

}  // namespace rme
