// SPDX-License-Identifier: Apache-2.0
//
// skysounder -- correlation channel sounding toolkit for drone radio links
// Copyright (C) 2026 skysounder contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "skysounder/chanmodel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace skysounder {

namespace {

constexpr double k_pi = 3.14159265358979323846;
// Taps closer than this are the same delay bin for synthesis purposes.
constexpr double k_merge_tol_s = 1e-12;
// Floor for serialized gains so the JSON stays finite.
constexpr double k_gain_floor_db = -400.0;

void require(bool cond, const char* msg) {
    if (!cond)
        throw std::invalid_argument(msg);
}

}  // namespace

double fspl_db(double distance_m, double wavelength_m) {
    require(distance_m > 0.0, "fspl: distance must be positive");
    require(wavelength_m > 0.0, "fspl: wavelength must be positive");
    return 20.0 * std::log10(4.0 * k_pi * distance_m / wavelength_m);
}

double fe2r_pl_db(double distance_m, double tx_height_m, double rx_height_m,
                  double wavelength_m, cxd reflection) {
    require(distance_m > 0.0, "fe2r: distance must be positive");
    require(tx_height_m >= 0.0 && rx_height_m >= 0.0,
            "fe2r: heights must be nonnegative");
    require(wavelength_m > 0.0, "fe2r: wavelength must be positive");
    require(std::abs(reflection) <= 1.0 + 1e-12,
            "fe2r: |reflection| must not exceed 1");

    const double dh = tx_height_m - rx_height_m;
    const double sh = tx_height_m + rx_height_m;
    const double l_d = std::sqrt(distance_m * distance_m + dh * dh);
    const double l_r = std::sqrt(distance_m * distance_m + sh * sh);
    const double k = 2.0 * k_pi / wavelength_m;

    const cxd direct = std::polar(1.0 / l_d, -k * l_d);
    const cxd bounce = reflection * std::polar(1.0 / l_r, -k * l_r);
    const double field = std::abs(direct + bounce) * wavelength_m / (4.0 * k_pi);
    return -20.0 * std::log10(field);
}

double log_distance_pl_db(double distance_m, double pl0_db, double eta,
                          double d0_m) {
    require(d0_m > 0.0, "log_distance: reference distance must be positive");
    require(distance_m >= d0_m,
            "log_distance: distance below the reference distance");
    return pl0_db + 10.0 * eta * std::log10(distance_m / d0_m);
}

double path_loss_db(const PathLossModelParams& params, double distance_m,
                    double tx_height_m, double rx_height_m) {
    switch (params.kind) {
        case PathLossKind::free_space:
            return fspl_db(distance_m, params.wavelength_m);
        case PathLossKind::flat_earth_two_ray: {
            // Callers hand in slant range; the closed form wants the
            // horizontal separation.
            const double dh = tx_height_m - rx_height_m;
            const double horiz_sq = distance_m * distance_m - dh * dh;
            require(horiz_sq > 0.0,
                    "two-ray: slant range shorter than the height difference");
            return fe2r_pl_db(std::sqrt(horiz_sq), tx_height_m, rx_height_m,
                              params.wavelength_m, params.reflection);
        }
        case PathLossKind::log_distance:
            return log_distance_pl_db(distance_m, params.pl0_db, params.eta,
                                      params.d0_m);
    }
    throw std::invalid_argument("path_loss: unknown model kind");
}

cxd fresnel_reflection(double grazing_rad, double eps_r,
                       double conductivity_s_m, double wavelength_m,
                       bool vertical) {
    require(grazing_rad > 0.0 && grazing_rad <= k_pi / 2.0 + 1e-12,
            "fresnel: grazing angle must lie in (0, pi/2]");
    require(eps_r >= 1.0, "fresnel: relative permittivity must be >= 1");
    require(conductivity_s_m >= 0.0, "fresnel: conductivity must be >= 0");
    if (conductivity_s_m > 0.0)
        require(wavelength_m > 0.0,
                "fresnel: wavelength needed for a conductive ground");

    const cxd eps(eps_r, -60.0 * wavelength_m * conductivity_s_m);
    const double s = std::sin(grazing_rad);
    const double c = std::cos(grazing_rad);
    const cxd root = std::sqrt(eps - c * c);
    if (vertical)
        return (eps * s - root) / (eps * s + root);
    return (s - root) / (s + root);
}

ChannelRealization synth_channel(const LinkGeometry& geom,
                                 const PathLossModelParams& params,
                                 const std::vector<ChannelTap>& extra_mpcs,
                                 double shadowing_db) {
    require(geom.distance_m > 0.0, "synth_channel: distance must be positive");
    require(params.wavelength_m > 0.0,
            "synth_channel: wavelength must be positive");

    const double lambda = params.wavelength_m;
    const double k = 2.0 * k_pi / lambda;
    const double l_d = geom.distance_m;

    std::vector<ChannelTap> taps;
    ChannelTap direct;
    direct.amplitude =
        amplitude_from_db(-path_loss_db(params, l_d, geom.tx_alt_m,
                                        geom.rx_alt_m));
    if (params.kind == PathLossKind::flat_earth_two_ray) {
        // Composite two-ray loss would double count the interference once
        // the bounce is its own tap; the direct tap carries free space.
        direct.amplitude = lambda / (4.0 * k_pi * l_d);
    }
    direct.phase_rad = std::remainder(-k * l_d, 2.0 * k_pi);
    direct.delay_s = l_d / speed_of_light_mps;
    taps.push_back(direct);

    if (params.kind == PathLossKind::flat_earth_two_ray) {
        require(geom.tx_alt_m >= 0.0 && geom.rx_alt_m >= 0.0,
                "synth_channel: two-ray heights must be nonnegative");
        // l_r^2 = horizontal^2 + (ht+hr)^2 = l_d^2 + 4*ht*hr.
        const double l_r =
            std::sqrt(l_d * l_d + 4.0 * geom.tx_alt_m * geom.rx_alt_m);
        ChannelTap bounce;
        bounce.amplitude = std::abs(params.reflection) * lambda / (4.0 * k_pi * l_r);
        bounce.phase_rad =
            std::remainder(-k * l_r + std::arg(params.reflection), 2.0 * k_pi);
        bounce.delay_s = l_r / speed_of_light_mps;
        taps.push_back(bounce);
    }

    for (const auto& mpc : extra_mpcs) {
        require(mpc.amplitude >= 0.0 && mpc.delay_s >= 0.0,
                "synth_channel: extra taps need nonnegative amplitude and delay");
        taps.push_back(mpc);
    }

    std::stable_sort(taps.begin(), taps.end(),
                     [](const ChannelTap& a, const ChannelTap& b) {
                         return a.delay_s < b.delay_s;
                     });

    const double shadow_scale = amplitude_from_db(-shadowing_db);
    ChannelRealization out;
    out.time_ns = geom.time_ns;
    for (const auto& tap : taps) {
        if (!out.taps.empty() &&
            tap.delay_s - out.taps.back().delay_s < k_merge_tol_s) {
            auto& prev = out.taps.back();
            const cxd sum = std::polar(prev.amplitude, prev.phase_rad) +
                            std::polar(tap.amplitude, tap.phase_rad);
            prev.amplitude = std::abs(sum);
            prev.phase_rad = std::arg(sum);
            continue;
        }
        out.taps.push_back(tap);
    }
    for (auto& tap : out.taps)
        tap.amplitude *= shadow_scale;
    return out;
}

std::vector<cxf> apply_channel(const std::vector<cxf>& tx,
                               const ChannelRealization& channel,
                               const ImpairmentSpec& impairments,
                               double sample_rate_hz,
                               std::uint64_t noise_seed) {
    require(sample_rate_hz > 0.0, "apply_channel: sample rate must be positive");
    require(!tx.empty(), "apply_channel: empty transmit block");
    require(std::abs(impairments.cfo_hz) < sample_rate_hz / 100.0,
            "apply_channel: CFO outside the supported range");

    const std::size_t n = tx.size();
    std::vector<cxd> acc(n, cxd{0.0, 0.0});
    for (const auto& tap : channel.taps) {
        require(tap.delay_s >= 0.0, "apply_channel: negative tap delay");
        const long long base = std::llround(tap.delay_s * sample_rate_hz);
        if (base >= static_cast<long long>(n))
            throw std::invalid_argument(
                "apply_channel: tap delay " + std::to_string(tap.delay_s) +
                " s exceeds the block duration of " +
                std::to_string(double(n) / sample_rate_hz) + " s");
        long long shift =
            (base + impairments.timing_offset_samples) % static_cast<long long>(n);
        if (shift < 0)
            shift += static_cast<long long>(n);
        const cxd gain = std::polar(tap.amplitude, tap.phase_rad);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = i + static_cast<std::size_t>(shift);
            if (j >= n)
                j -= n;
            acc[j] += gain * cxd(tx[i]);
        }
    }

    if (impairments.cfo_hz != 0.0) {
        const double step = 2.0 * k_pi * impairments.cfo_hz / sample_rate_hz;
        for (std::size_t i = 0; i < n; ++i)
            acc[i] *= std::polar(1.0, step * double(i));
    }

    if (std::isfinite(impairments.noise_density_dbm_hz)) {
        const double noise_power_mw = power_from_db(
            impairments.noise_density_dbm_hz + 10.0 * std::log10(sample_rate_hz));
        const double sigma = std::sqrt(noise_power_mw / 2.0);
        std::mt19937_64 rng(noise_seed);
        std::normal_distribution<double> gauss(0.0, sigma);
        for (auto& v : acc) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            v += cxd(re, im);
        }
    }

    std::vector<cxf> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = cxf(static_cast<float>(acc[i].real()),
                     static_cast<float>(acc[i].imag()));
    return out;
}

double received_power_dbm(double tx_power_dbm, double pl_db, double tx_gain_dbi,
                          double rx_gain_dbi) {
    return tx_power_dbm - pl_db + tx_gain_dbi + rx_gain_dbi;
}

double channel_gain_db(const ChannelRealization& channel) {
    double power = 0.0;
    for (const auto& tap : channel.taps)
        power += tap.amplitude * tap.amplitude;
    return db_from_power(power);
}

std::string tap_table_json(const ChannelRealization& channel) {
    nlohmann::json j;
    j["time_ns"] = channel.time_ns;
    auto& arr = j["taps"] = nlohmann::json::array();
    for (const auto& tap : channel.taps) {
        double gain_db = db_from_amplitude(tap.amplitude);
        if (!std::isfinite(gain_db) || gain_db < k_gain_floor_db)
            gain_db = k_gain_floor_db;
        arr.push_back({{"delay_ns", tap.delay_s * 1e9},
                       {"gain_db", gain_db},
                       {"phase_rad", tap.phase_rad}});
    }
    return j.dump();
}

ChannelRealization tap_table_from_json(const std::string& line) {
    const auto j = nlohmann::json::parse(line);
    ChannelRealization out;
    out.time_ns = j.at("time_ns").get<std::int64_t>();
    for (const auto& t : j.at("taps")) {
        ChannelTap tap;
        tap.delay_s = t.at("delay_ns").get<double>() * 1e-9;
        tap.amplitude = amplitude_from_db(t.at("gain_db").get<double>());
        tap.phase_rad = t.at("phase_rad").get<double>();
        out.taps.push_back(tap);
    }
    return out;
}

}  // namespace skysounder
