// SPDX-License-Identifier: Apache-2.0
//
// Measurement-set files: a CSV with header `x_m,y_m,power_db` plus a sidecar
// metadata file (same stem, `.meta` extension) holding region_x_m,
// region_y_m, wavelength_m and grid_spacing_m.

#pragma once

#include <filesystem>
#include <iosfwd>

#include "rme/types.hpp"

namespace rme {

struct DatasetFile {
    MeasurementSet set;
    double grid_spacing = 0.0;
};

std::filesystem::path metadata_path(const std::filesystem::path& csv_path);

/// Writes `<path>` and its sidecar. Coordinates are written with 9 significant
/// digits and powers with 6.
void write_dataset(const std::filesystem::path& csv_path, const MeasurementSet& set,
                   double grid_spacing);

DatasetFile read_dataset(const std::filesystem::path& csv_path);

void write_measurements_csv(std::ostream& out, const MeasurementSet& set);
std::vector<Measurement> read_measurements_csv(std::istream& in);

}  // namespace rme
