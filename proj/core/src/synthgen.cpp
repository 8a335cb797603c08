// SPDX-License-Identifier: Apache-2.0

#include "rme/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "rme/random.hpp"

namespace rme {

namespace {

constexpr std::uint64_t kShadowStream = 0;
constexpr std::uint64_t kFadingStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr double kReferenceDistance = 1.0;  // m
constexpr double kMinEnvelopePower = 1e-10;

std::string key(const std::string& section, const char* name) {
    return section.empty() ? std::string(name) : section + "." + name;
}

// Lower Cholesky factor of the Gudmundson covariance (unit variance) on an
// nx x ny node grid. Factorizations are reused across maps of the same
// geometry since they dominate generation cost.
class ShadowFactorCache {
public:
    std::shared_ptr<const Matrix> get(std::size_t nx, std::size_t ny, double spacing,
                                      double half_distance) {
        std::lock_guard lock(mutex_);
        for (const auto& e : entries_)
            if (e.nx == nx && e.ny == ny && e.spacing == spacing && e.half_distance == half_distance)
                return e.factor;
        auto factor = std::make_shared<const Matrix>(factorize(nx, ny, spacing, half_distance));
        if (entries_.size() >= 8) entries_.erase(entries_.begin());
        entries_.push_back({nx, ny, spacing, half_distance, factor});
        return factor;
    }

private:
    struct Entry {
        std::size_t nx, ny;
        double spacing, half_distance;
        std::shared_ptr<const Matrix> factor;
    };

    static Matrix factorize(std::size_t nx, std::size_t ny, double spacing, double half_distance) {
        const auto n = static_cast<Eigen::Index>(nx * ny);
        Matrix cov(n, n);
        for (Eigen::Index a = 0; a < n; ++a) {
            const Location pa{spacing * static_cast<double>(a % static_cast<Eigen::Index>(nx)),
                              spacing * static_cast<double>(a / static_cast<Eigen::Index>(nx))};
            for (Eigen::Index b = 0; b <= a; ++b) {
                const Location pb{spacing * static_cast<double>(b % static_cast<Eigen::Index>(nx)),
                                  spacing * static_cast<double>(b / static_cast<Eigen::Index>(nx))};
                cov(a, b) = cov(b, a) = std::exp2(-distance(pa, pb) / half_distance);
            }
        }
        cov.diagonal().array() += 1e-9;
        Eigen::LLT<Matrix> llt(cov);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error(fmt::format(
                "shadowing covariance on {} x {} nodes is not positive definite", nx, ny));
        return llt.matrixL();
    }

    std::mutex mutex_;
    std::vector<Entry> entries_;
};

ShadowFactorCache& shadow_cache() {
    static ShadowFactorCache cache;
    return cache;
}

}  // namespace

void PropagationConfig::validate() const {
    if (!(shadow_variance >= 0.0)) throw std::invalid_argument("shadow_variance must be >= 0");
    if (!(shadow_half_distance > 0.0)) throw std::invalid_argument("shadow_half_distance must be > 0");
    if (!(path_loss_exponent >= 0.0)) throw std::invalid_argument("path_loss_exponent must be >= 0");
    if (!(noise_std >= 0.0)) throw std::invalid_argument("noise_std must be >= 0");
    if (!(wavelength > 0.0)) throw std::invalid_argument("wavelength must be > 0");
    if (!(field_spacing >= 0.0)) throw std::invalid_argument("field_spacing must be >= 0");
}

PropagationConfig propagation_from_config(const Config& cfg, const std::string& section) {
    PropagationConfig p;
    p.tx_power_plus_gain = cfg.get_double(key(section, "tx_power_plus_gain"), p.tx_power_plus_gain);
    p.tx_location.x = cfg.get_double(key(section, "tx_x"), p.tx_location.x);
    p.tx_location.y = cfg.get_double(key(section, "tx_y"), p.tx_location.y);
    p.path_loss_exponent = cfg.get_double(key(section, "path_loss_exponent"), p.path_loss_exponent);
    p.shadow_variance = cfg.get_double(key(section, "shadow_variance"), p.shadow_variance);
    p.shadow_half_distance =
        cfg.get_double(key(section, "shadow_half_distance"), p.shadow_half_distance);
    p.fading_enabled = cfg.get_bool(key(section, "fading_enabled"), p.fading_enabled);
    p.noise_std = cfg.get_double(key(section, "noise_std"), p.noise_std);
    p.wavelength = cfg.get_double(key(section, "wavelength"), p.wavelength);
    p.seed = static_cast<std::uint64_t>(cfg.get_int(key(section, "seed"), static_cast<long long>(p.seed)));
    p.field_spacing = cfg.get_double(key(section, "field_spacing"), p.field_spacing);
    p.validate();
    return p;
}

void propagation_to_config(const PropagationConfig& p, Config& cfg, const std::string& section) {
    cfg.set(key(section, "tx_power_plus_gain"), p.tx_power_plus_gain);
    cfg.set(key(section, "tx_x"), p.tx_location.x);
    cfg.set(key(section, "tx_y"), p.tx_location.y);
    cfg.set(key(section, "path_loss_exponent"), p.path_loss_exponent);
    cfg.set(key(section, "shadow_variance"), p.shadow_variance);
    cfg.set(key(section, "shadow_half_distance"), p.shadow_half_distance);
    cfg.set(key(section, "fading_enabled"), std::string(p.fading_enabled ? "true" : "false"));
    cfg.set(key(section, "noise_std"), p.noise_std);
    cfg.set(key(section, "wavelength"), p.wavelength);
    cfg.set(key(section, "seed"), std::to_string(p.seed));
    cfg.set(key(section, "field_spacing"), p.field_spacing);
}

double shadow_covariance(const Location& a, const Location& b, const PropagationConfig& cfg) {
    return cfg.shadow_variance * std::exp2(-distance(a, b) / cfg.shadow_half_distance);
}

double GroundTruthMap::path_loss(const Location& p) const {
    const double d = std::max(distance(p, cfg_.tx_location), cfg_.wavelength);
    return 10.0 * cfg_.path_loss_exponent * std::log10(d / kReferenceDistance);
}

double GroundTruthMap::shadowing(const Location& p) const {
    if (field_.empty()) return 0.0;
    const double fx = std::clamp(p.x / field_spacing_, 0.0, static_cast<double>(field_nx_ - 1));
    const double fy = std::clamp(p.y / field_spacing_, 0.0, static_cast<double>(field_ny_ - 1));
    const auto x0 = std::min(static_cast<std::size_t>(fx), field_nx_ - 2);
    const auto y0 = std::min(static_cast<std::size_t>(fy), field_ny_ - 2);
    const double tx = fx - static_cast<double>(x0);
    const double ty = fy - static_cast<double>(y0);
    const auto at = [&](std::size_t ix, std::size_t iy) { return field_[iy * field_nx_ + ix]; };
    return (1 - tx) * (1 - ty) * at(x0, y0) + tx * (1 - ty) * at(x0 + 1, y0) +
           (1 - tx) * ty * at(x0, y0 + 1) + tx * ty * at(x0 + 1, y0 + 1);
}

double GroundTruthMap::fading_loss(const Location& p) const {
    if (wave_kx_.empty()) return 0.0;
    std::complex<double> field = 0.0;
    for (std::size_t k = 0; k < wave_kx_.size(); ++k)
        field += std::polar(1.0, wave_kx_[k] * p.x + wave_ky_[k] * p.y + wave_phase_[k]);
    const double power = std::norm(field) / static_cast<double>(wave_kx_.size());
    return -10.0 * std::log10(std::max(power, kMinEnvelopePower));
}

double GroundTruthMap::fading_free(const Location& p) const {
    return cfg_.tx_power_plus_gain - path_loss(p) - shadowing(p);
}

double GroundTruthMap::with_fading(const Location& p) const { return fading_free(p) - fading_loss(p); }

GroundTruthMap generate_map(const Region& region, const PropagationConfig& cfg) {
    cfg.validate();
    if (!(region.size_x > 0.0) || !(region.size_y > 0.0))
        throw std::invalid_argument("region sides must be positive");

    GroundTruthMap map;
    map.cfg_ = cfg;
    map.region_ = region;

    if (cfg.shadow_variance > 0.0) {
        const double spacing =
            cfg.field_spacing > 0.0 ? cfg.field_spacing : std::max(region.size_x, region.size_y) / 44.0;
        map.field_spacing_ = spacing;
        map.field_nx_ = static_cast<std::size_t>(std::ceil(region.size_x / spacing - 1e-9)) + 1;
        map.field_ny_ = static_cast<std::size_t>(std::ceil(region.size_y / spacing - 1e-9)) + 1;
        const auto factor = shadow_cache().get(map.field_nx_, map.field_ny_, spacing,
                                               cfg.shadow_half_distance);
        Rng rng = child_rng(cfg.seed, kShadowStream);
        Vector white(factor->rows());
        for (Eigen::Index i = 0; i < white.size(); ++i) white[i] = standard_normal(rng);
        Vector sample = factor->triangularView<Eigen::Lower>() * white;
        sample *= std::sqrt(cfg.shadow_variance);
        map.field_.assign(sample.data(), sample.data() + sample.size());
    }

    if (cfg.fading_enabled) {
        Rng rng = child_rng(cfg.seed, kFadingStream);
        const double wavenumber = 2.0 * std::numbers::pi / cfg.wavelength;
        for (std::size_t k = 0; k < kFadingWaves; ++k) {
            const double angle = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
            map.wave_kx_.push_back(wavenumber * std::cos(angle));
            map.wave_ky_.push_back(wavenumber * std::sin(angle));
            map.wave_phase_.push_back(uniform_real(rng, 0.0, 2.0 * std::numbers::pi));
        }
    }
    return map;
}

MeasurementSet sample_measurements(const GroundTruthMap& map, const std::vector<Location>& locations) {
    Rng rng = child_rng(map.config().seed, kNoiseStream);
    std::vector<Measurement> out;
    out.reserve(locations.size());
    for (const auto& loc : locations) {
        if (!map.region().contains(loc))
            throw std::invalid_argument(fmt::format("location ({}, {}) outside region", loc.x, loc.y));
        double p = map.with_fading(loc);
        if (map.config().noise_std > 0.0) p += map.config().noise_std * standard_normal(rng);
        out.push_back({loc, p});
    }
    return MeasurementSet(std::move(out), map.region(), map.config().wavelength);
}

std::vector<Location> lawnmower_locations(const Region& region, double line_spacing,
                                          double along_spacing) {
    if (!(line_spacing > 0.0) || !(along_spacing > 0.0))
        throw std::invalid_argument("lawnmower spacings must be positive");
    const auto lines = static_cast<std::size_t>(std::floor(region.size_y / line_spacing + 1e-9)) + 1;
    const auto points = static_cast<std::size_t>(std::floor(region.size_x / along_spacing + 1e-9)) + 1;
    std::vector<Location> out;
    out.reserve(lines * points);
    for (std::size_t k = 0; k < lines; ++k) {
        const double y = std::min(static_cast<double>(k) * line_spacing, region.size_y);
        for (std::size_t m = 0; m < points; ++m) {
            const std::size_t step = k % 2 == 0 ? m : points - 1 - m;
            out.push_back({std::min(static_cast<double>(step) * along_spacing, region.size_x), y});
        }
    }
    return out;
}

}  // namespace rme
