// SPDX-License-Identifier: Apache-2.0
//
// Patch sampling and observed / unobserved splits.

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "rme/random.hpp"
#include "rme/types.hpp"

namespace rme {

/// Raised when no non-empty patch is found within the retry budget.
class EmptyPatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Number of region-grid points along x and y for grid spacing `spacing`.
std::pair<std::size_t, std::size_t> region_grid_size(const Region& region, double spacing);

/// Number of distinct grid-aligned corners for an ell x ell patch:
/// (L_x - N_x + 1)(L_y - N_y + 1) in grid units.
std::size_t admissible_corner_count(const Region& region, double spacing, double side);

/// Draws a patch whose corner is uniform over the admissible multiples of
/// `spacing` and returns the measurements inside it. Empty patches are redrawn
/// up to `max_attempts` times before EmptyPatchError.
EstimationInstance sample_patch(const MeasurementSet& set, double side, double spacing, Rng& rng,
                                std::size_t max_attempts = 100);

/// Measurements of `set` inside `patch`, in set order.
EstimationInstance extract_patch(const MeasurementSet& set, const Patch& patch);

/// Uniform split without replacement of {0..n-1} into n_obs observed indices.
/// Requires 1 <= n_obs < n. Both index lists come back sorted.
ObservationSplit split_uniform(std::size_t n, std::size_t n_obs, Rng& rng);

inline ObservationSplit split_uniform(const EstimationInstance& instance, std::size_t n_obs,
                                      Rng& rng) {
    return split_uniform(instance.size(), n_obs, rng);
}

/// Picks n_obs occupied grid points uniformly; every measurement assigned to a
/// picked point is observed. Requires n_obs <= occupied point count.
ObservationSplit split_clustered(const EstimationInstance& instance, const GridSpec& spec,
                                 std::size_t n_obs, Rng& rng);

/// Uniform split of the given entries (e.g. occupied grid entries) where the
/// observed part may take all of them. Requires 1 <= n_obs <= entries.size().
/// Returned lists hold values from `entries`, sorted.
ObservationSplit split_entries(std::span<const std::size_t> entries, std::size_t n_obs, Rng& rng);

/// Measurements with the given indices.
std::vector<Measurement> select(std::span<const Measurement> all, std::span<const std::size_t> idx);

}  // namespace rme
