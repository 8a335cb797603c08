// SPDX-License-Identifier: Apache-2.0
//
// Core domain types: measurements, grids, patches and observation splits.

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace rme {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Cartesian position in meters, region-local.
struct Location {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Location&, const Location&) = default;
};

inline double distance(const Location& a, const Location& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

inline double squared_distance(const Location& a, const Location& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

/// A geolocated power sample in dB (typically dBm).
struct Measurement {
    Location loc;
    double power_db = 0.0;

    friend bool operator==(const Measurement&, const Measurement&) = default;
};

struct Region {
    double size_x = 0.0;
    double size_y = 0.0;

    bool contains(const Location& p) const {
        return p.x >= 0.0 && p.y >= 0.0 && p.x <= size_x && p.y <= size_y;
    }
};

/// All measurements collected over one large rectangle.
class MeasurementSet {
public:
    MeasurementSet(std::vector<Measurement> measurements, Region region, double wavelength);

    const std::vector<Measurement>& measurements() const { return measurements_; }
    const Region& region() const { return region_; }
    double wavelength() const { return wavelength_; }
    std::size_t size() const { return measurements_.size(); }

private:
    std::vector<Measurement> measurements_;
    Region region_;
    double wavelength_;
};

/// Rectangular grid. Rows are indexed top-down, so row 1 sits at the largest y.
/// Indices are 1-based in the public API.
struct GridSpec {
    std::size_t n_rows = 1;  // N_y
    std::size_t n_cols = 1;  // N_x
    double spacing = 1.0;    // delta
    Location origin;         // location of grid point (N_y, 1)

    void validate() const;
    std::size_t size() const { return n_rows * n_cols; }
};

/// Grid-quantized measurements: value matrix plus occupancy mask.
struct QuantizedGrid {
    Matrix values;
    Mask mask;
    GridSpec spec;

    std::size_t occupied_count() const;
};

/// Square patch with its bottom-left corner on the region grid. Membership is
/// half-open, [corner, corner + side), except that a patch touching the region
/// border also takes the points lying exactly on that border.
struct Patch {
    Location corner;
    double side = 0.0;

    bool contains(const Location& p, const Region& region) const {
        const auto inside = [](double v, double lo, double side, double limit) {
            const double hi = lo + side;
            return v >= lo && (v < hi || (hi >= limit && v <= limit));
        };
        return inside(p.x, corner.x, side, region.size_x) &&
               inside(p.y, corner.y, side, region.size_y);
    }
};

/// Measurements falling inside one patch.
struct EstimationInstance {
    std::vector<Measurement> measurements;
    Patch patch;

    std::size_t size() const { return measurements.size(); }
};

/// Partition of a 0-based index set into observed and unobserved parts.
struct ObservationSplit {
    std::vector<std::size_t> obs;
    std::vector<std::size_t> nobs;
};

enum class CombiningMode { NaturalMean, DbMean, NaturalMedian, DbMedian };

std::string_view to_string(CombiningMode mode);
CombiningMode combining_mode_from_string(std::string_view name);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace rme
