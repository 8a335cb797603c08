// SPDX-License-Identifier: Apache-2.0
//
// Common estimator interface. Every estimator receives the observed data of
// one estimation instance in both plain and grid-quantized form and returns a
// map estimate.

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rme/types.hpp"

namespace rme {

/// Observations passed to an estimator.
struct ObservedData {
    /// Plain observed measurements.
    std::vector<Measurement> raw;
    /// Observed entries quantized on the patch grid (unobserved entries zero).
    QuantizedGrid grid;
    /// Grid-aware problem: point estimators use the observed grid entries as
    /// their measurements instead of `raw`.
    bool grid_aware = false;
};

/// Observed grid entries as measurements located at their grid points.
std::vector<Measurement> grid_observations(const QuantizedGrid& grid);

/// Measurements a point estimator should fit for `data`.
std::vector<Measurement> point_observations(const ObservedData& data);

class MapEstimate {
public:
    using Function = std::function<double(const Location&)>;

    static MapEstimate from_function(Function f);
    /// Grid-valued estimate; off-grid queries take the nearest grid point.
    static MapEstimate from_grid(Matrix values, const GridSpec& spec);

    double evaluate(const Location& p) const;
    const std::optional<Matrix>& grid_values() const { return grid_; }

    /// Values at every point of `spec`, taken from the grid when it matches.
    Matrix on_grid(const GridSpec& spec) const;

private:
    Function fn_;
    std::optional<Matrix> grid_;
    GridSpec spec_;
};

class Estimator {
public:
    virtual ~Estimator() = default;
    virtual std::string id() const = 0;
    virtual MapEstimate estimate(const ObservedData& data) const = 0;
};

using EstimatorPtr = std::shared_ptr<const Estimator>;

}  // namespace rme
