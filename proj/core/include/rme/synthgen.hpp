// SPDX-License-Identifier: Apache-2.0
//
// Synthetic received-power maps: log-distance path loss, Gudmundson-correlated
// log-normal shadowing and Clarke sum-of-sinusoids small-scale fading, plus
// additive Gaussian measurement noise.

#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "rme/config.hpp"
#include "rme/types.hpp"

namespace rme {

struct PropagationConfig {
    double tx_power_plus_gain = 0.0;    // dB
    Location tx_location{-50.0, -50.0};
    double path_loss_exponent = 2.0;
    double shadow_variance = 0.0;       // dB^2
    double shadow_half_distance = 50.0; // m, distance where the correlation halves
    bool fading_enabled = false;
    double noise_std = 0.0;             // dB
    double wavelength = 0.32657;        // m
    std::uint64_t seed = 1;
    /// Node spacing of the sampled shadowing grid; 0 picks region side / 44.
    double field_spacing = 0.0;

    void validate() const;
};

PropagationConfig propagation_from_config(const Config& cfg, const std::string& section = "");
void propagation_to_config(const PropagationConfig& p, Config& cfg, const std::string& section = "");

/// Gudmundson covariance sigma_u^2 * 2^(-|a - b| / delta_s).
double shadow_covariance(const Location& a, const Location& b, const PropagationConfig& cfg);

/// Number of plane waves in the fading model.
inline constexpr std::size_t kFadingWaves = 32;

/// One realization of the propagation model over a region.
class GroundTruthMap {
public:
    /// Path loss and shadowing only, dB.
    double fading_free(const Location& p) const;
    /// Received power including small-scale fading, dB.
    double with_fading(const Location& p) const;
    /// -20 log10 of the fading envelope; zero when fading is disabled.
    double fading_loss(const Location& p) const;
    double path_loss(const Location& p) const;
    double shadowing(const Location& p) const;

    const PropagationConfig& config() const { return cfg_; }
    const Region& region() const { return region_; }

private:
    friend GroundTruthMap generate_map(const Region&, const PropagationConfig&);

    PropagationConfig cfg_;
    Region region_;
    double field_spacing_ = 1.0;
    std::size_t field_nx_ = 0;
    std::size_t field_ny_ = 0;
    std::vector<double> field_;  // row-major by y, then x
    std::vector<double> wave_kx_, wave_ky_, wave_phase_;
};

/// Draws the shadowing field jointly on a node grid (Cholesky factor of the
/// Gudmundson covariance, cached per geometry) and the fading plane waves.
/// Throws std::runtime_error if the covariance cannot be factorized.
GroundTruthMap generate_map(const Region& region, const PropagationConfig& cfg);

/// Noisy samples p(x_n) + z_n with z_n ~ N(0, noise_std^2); fading included
/// when enabled. Uses its own stream derived from cfg.seed.
MeasurementSet sample_measurements(const GroundTruthMap& map, const std::vector<Location>& locations);

/// Serpentine survey path: lines y = k * line_spacing, points every
/// along_spacing, both inclusive of the region border. Turnarounds excluded.
std::vector<Location> lawnmower_locations(const Region& region, double line_spacing,
                                          double along_spacing);

}  // namespace rme
