// SPDX-License-Identifier: Apache-2.0

#include "rme/estimator.hpp"

#include <stdexcept>

#include "rme/grid.hpp"

namespace rme {

std::vector<Measurement> grid_observations(const QuantizedGrid& grid) {
    std::vector<Measurement> out;
    for (const auto flat : occupied_entries(grid)) {
        const auto g = grid_index(grid.spec, flat);
        out.push_back({grid_point_location(grid.spec, g.row, g.col),
                       grid.values(static_cast<Eigen::Index>(g.row - 1),
                                   static_cast<Eigen::Index>(g.col - 1))});
    }
    return out;
}

std::vector<Measurement> point_observations(const ObservedData& data) {
    return data.grid_aware ? grid_observations(data.grid) : data.raw;
}

MapEstimate MapEstimate::from_function(Function f) {
    MapEstimate e;
    e.fn_ = std::move(f);
    return e;
}

MapEstimate MapEstimate::from_grid(Matrix values, const GridSpec& spec) {
    if (values.rows() != static_cast<Eigen::Index>(spec.n_rows) ||
        values.cols() != static_cast<Eigen::Index>(spec.n_cols))
        throw std::invalid_argument("grid estimate does not match its grid spec");
    MapEstimate e;
    e.grid_ = std::move(values);
    e.spec_ = spec;
    return e;
}

double MapEstimate::evaluate(const Location& p) const {
    if (grid_) {
        const auto g = nearest_grid_point(spec_, p);
        return (*grid_)(static_cast<Eigen::Index>(g.row - 1), static_cast<Eigen::Index>(g.col - 1));
    }
    return fn_(p);
}

Matrix MapEstimate::on_grid(const GridSpec& spec) const {
    if (grid_ && spec.n_rows == spec_.n_rows && spec.n_cols == spec_.n_cols &&
        spec.spacing == spec_.spacing && spec.origin == spec_.origin)
        return *grid_;
    Matrix out(static_cast<Eigen::Index>(spec.n_rows), static_cast<Eigen::Index>(spec.n_cols));
    for (std::size_t i = 1; i <= spec.n_rows; ++i)
        for (std::size_t j = 1; j <= spec.n_cols; ++j)
            out(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) =
                evaluate(grid_point_location(spec, i, j));
    return out;
}

}  // namespace rme
