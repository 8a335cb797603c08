// SPDX-License-Identifier: Apache-2.0

#include "rme/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "rme/grid.hpp"

namespace rme {

namespace {

std::size_t grid_steps(double length, double spacing) {
    return static_cast<std::size_t>(std::floor(length / spacing + 1e-9));
}

// Draws k distinct values from `pool` (partial Fisher-Yates) and returns the
// drawn and remaining values, each sorted.
ObservationSplit draw_without_replacement(std::vector<std::size_t> pool, std::size_t k, Rng& rng) {
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = uniform_int<std::size_t>(rng, i, pool.size() - 1);
        std::swap(pool[i], pool[j]);
    }
    ObservationSplit split;
    split.obs.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    split.nobs.assign(pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end());
    std::sort(split.obs.begin(), split.obs.end());
    std::sort(split.nobs.begin(), split.nobs.end());
    return split;
}

}  // namespace

std::pair<std::size_t, std::size_t> region_grid_size(const Region& region, double spacing) {
    if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
    return {grid_steps(region.size_x, spacing), grid_steps(region.size_y, spacing)};
}

std::size_t admissible_corner_count(const Region& region, double spacing, double side) {
    const auto [gx, gy] = region_grid_size(region, spacing);
    const std::size_t n = grid_steps(side, spacing);
    if (n == 0 || n > gx || n > gy)
        throw std::invalid_argument(fmt::format(
            "patch side {} does not fit a {} x {} region", side, region.size_x, region.size_y));
    return (gx - n + 1) * (gy - n + 1);
}

EstimationInstance extract_patch(const MeasurementSet& set, const Patch& patch) {
    EstimationInstance out;
    out.patch = patch;
    for (const auto& m : set.measurements())
        if (patch.contains(m.loc, set.region())) out.measurements.push_back(m);
    return out;
}

EstimationInstance sample_patch(const MeasurementSet& set, double side, double spacing, Rng& rng,
                                std::size_t max_attempts) {
    const auto [gx, gy] = region_grid_size(set.region(), spacing);
    const std::size_t n = grid_steps(side, spacing);
    admissible_corner_count(set.region(), spacing, side);  // validates the fit

    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
        const auto kx = uniform_int<std::size_t>(rng, 0, gx - n);
        const auto ky = uniform_int<std::size_t>(rng, 0, gy - n);
        Patch patch{{static_cast<double>(kx) * spacing, static_cast<double>(ky) * spacing}, side};
        auto instance = extract_patch(set, patch);
        if (!instance.measurements.empty()) return instance;
    }
    throw EmptyPatchError(
        fmt::format("no non-empty {} m patch found after {} attempts", side, max_attempts));
}

ObservationSplit split_uniform(std::size_t n, std::size_t n_obs, Rng& rng) {
    if (n_obs < 1 || n_obs >= n)
        throw std::invalid_argument(
            fmt::format("n_obs = {} must satisfy 1 <= n_obs < N = {}", n_obs, n));
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    return draw_without_replacement(std::move(pool), n_obs, rng);
}

ObservationSplit split_entries(std::span<const std::size_t> entries, std::size_t n_obs, Rng& rng) {
    if (n_obs < 1 || n_obs > entries.size())
        throw std::invalid_argument(fmt::format("n_obs = {} must satisfy 1 <= n_obs <= {}", n_obs,
                                                entries.size()));
    return draw_without_replacement({entries.begin(), entries.end()}, n_obs, rng);
}

ObservationSplit split_clustered(const EstimationInstance& instance, const GridSpec& spec,
                                 std::size_t n_obs, Rng& rng) {
    const auto cells = assign_to_grid(instance.measurements, spec);
    std::vector<std::size_t> occupied = cells;
    std::sort(occupied.begin(), occupied.end());
    occupied.erase(std::unique(occupied.begin(), occupied.end()), occupied.end());
    if (n_obs > occupied.size())
        throw std::invalid_argument(fmt::format(
            "n_obs = {} exceeds the {} occupied grid points", n_obs, occupied.size()));
    if (n_obs < 1) throw std::invalid_argument("n_obs must be at least 1");

    const auto picked = draw_without_replacement(std::move(occupied), n_obs, rng).obs;
    ObservationSplit split;
    for (std::size_t n = 0; n < cells.size(); ++n) {
        if (std::binary_search(picked.begin(), picked.end(), cells[n]))
            split.obs.push_back(n);
        else
            split.nobs.push_back(n);
    }
    return split;
}

std::vector<Measurement> select(std::span<const Measurement> all, std::span<const std::size_t> idx) {
    std::vector<Measurement> out;
    out.reserve(idx.size());
    for (const auto i : idx) out.push_back(all[i]);
    return out;
}

}  // namespace rme
