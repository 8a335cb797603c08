// SPDX-License-Identifier: Apache-2.0

#include "rme/types.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace rme {

MeasurementSet::MeasurementSet(std::vector<Measurement> measurements, Region region,
                               double wavelength)
    : measurements_(std::move(measurements)), region_(region), wavelength_(wavelength) {
    if (!(wavelength_ > 0.0)) throw std::invalid_argument("wavelength must be positive");
    if (!(region_.size_x > 0.0) || !(region_.size_y > 0.0))
        throw std::invalid_argument("region sides must be positive");
    if (measurements_.empty()) throw std::invalid_argument("measurement set is empty");
    for (const auto& m : measurements_) {
        if (!std::isfinite(m.power_db) || !std::isfinite(m.loc.x) || !std::isfinite(m.loc.y))
            throw std::invalid_argument("measurement set contains non-finite values");
        if (!region_.contains(m.loc))
            throw std::invalid_argument(fmt::format(
                "measurement at ({}, {}) lies outside the {} x {} region", m.loc.x, m.loc.y,
                region_.size_x, region_.size_y));
    }
}

void GridSpec::validate() const {
    if (n_rows == 0 || n_cols == 0) throw std::invalid_argument("grid must have at least one point");
    if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
}

std::size_t QuantizedGrid::occupied_count() const {
    return static_cast<std::size_t>((mask.array() != 0).count());
}

std::string_view to_string(CombiningMode mode) {
    switch (mode) {
        case CombiningMode::NaturalMean: return "natural_mean";
        case CombiningMode::DbMean: return "db_mean";
        case CombiningMode::NaturalMedian: return "natural_median";
        case CombiningMode::DbMedian: return "db_median";
    }
    return "unknown";
}

CombiningMode combining_mode_from_string(std::string_view name) {
    for (auto mode : {CombiningMode::NaturalMean, CombiningMode::DbMean,
                      CombiningMode::NaturalMedian, CombiningMode::DbMedian}) {
        if (to_string(mode) == name) return mode;
    }
    throw std::invalid_argument(fmt::format("unknown combining mode '{}'", name));
}

}  // namespace rme
