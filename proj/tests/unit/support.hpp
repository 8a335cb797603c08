// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures for the unit tests.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rme/random.hpp"
#include "rme/types.hpp"

namespace test {

/// Measurements on a regular lattice covering `region` with random powers.
inline rme::MeasurementSet dense_set(rme::Region region, double step, std::uint64_t seed,
                                     double wavelength = 0.32657) {
    rme::Rng rng(seed);
    std::vector<rme::Measurement> m;
    for (double y = 0.0; y <= region.size_y + 1e-9; y += step)
        for (double x = 0.0; x <= region.size_x + 1e-9; x += step)
            m.push_back({{std::min(x, region.size_x), std::min(y, region.size_y)},
                         rme::uniform_real(rng, -90.0, -40.0)});
    return {std::move(m), region, wavelength};
}

/// Random measurements inside [0, side]^2.
inline std::vector<rme::Measurement> random_measurements(std::size_t n, double side, rme::Rng& rng) {
    std::vector<rme::Measurement> m;
    for (std::size_t i = 0; i < n; ++i)
        m.push_back({{rme::uniform_real(rng, 0.0, side), rme::uniform_real(rng, 0.0, side)},
                     rme::uniform_real(rng, -80.0, -50.0)});
    return m;
}

/// Fresh empty directory under the system temp path.
inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("rme_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace test
