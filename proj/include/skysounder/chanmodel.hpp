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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skysounder/common.hpp"
#include "skysounder/geometry.hpp"

namespace skysounder {

// One discrete propagation path. Amplitude is linear field gain, so
// -20*log10(amplitude) is that path's loss in dB. Delay is absolute.
struct ChannelTap {
    double amplitude = 0.0;
    double phase_rad = 0.0;
    double delay_s = 0.0;
};

// The channel at one instant: taps sorted by nondecreasing delay. When a
// line-of-sight path exists it is the first tap.
struct ChannelRealization {
    std::vector<ChannelTap> taps;
    std::int64_t time_ns = 0;
};

enum class PathLossKind {
    free_space,
    flat_earth_two_ray,
    log_distance,
};

struct PathLossModelParams {
    PathLossKind kind = PathLossKind::free_space;
    double wavelength_m = 0.0;
    // log_distance parameters, referenced to d0_m.
    double eta = 2.0;
    double pl0_db = 0.0;
    double d0_m = 1.0;
    // flat_earth_two_ray ground reflection coefficient, |reflection| <= 1.
    cxd reflection = {-1.0, 0.0};
};

// Receiver-side impairments applied on top of the tap model.
struct ImpairmentSpec {
    // One-sided density at the receiver input, dBm/Hz; the per-sample
    // variance follows from the sample rate. -inf disables noise.
    double noise_density_dbm_hz = -174.0;
    double cfo_hz = 0.0;
    // Static trigger misalignment, whole samples, applied circularly.
    std::int64_t timing_offset_samples = 0;
};

// Free-space loss 20*log10(4*pi*d/lambda). Throws for d <= 0 or
// lambda <= 0.
double fspl_db(double distance_m, double wavelength_m);

// Flat-earth two-ray loss: direct ray plus one specular ground bounce
// with coefficient `reflection`. `distance_m` is horizontal separation,
// heights are above the reflecting plane. Throws for distance_m <= 0 or
// negative heights.
double fe2r_pl_db(double distance_m, double tx_height_m, double rx_height_m,
                  double wavelength_m, cxd reflection = {-1.0, 0.0});

// pl0_db + 10*eta*log10(d/d0). Throws for d < d0.
double log_distance_pl_db(double distance_m, double pl0_db, double eta,
                          double d0_m = 1.0);

// Dispatch on params.kind at slant range distance_m. The two-ray kind
// needs the endpoint heights.
double path_loss_db(const PathLossModelParams& params, double distance_m,
                    double tx_height_m = 0.0, double rx_height_m = 0.0);

// Specular reflection coefficient of homogeneous ground at grazing angle
// `grazing_rad` above the horizon. The ground is eps_r relative
// permittivity and `conductivity_s_m` S/m at the given wavelength
// (complex permittivity eps_r - j*60*lambda*sigma). Vertical polarization
// when `vertical` is set, horizontal otherwise.
cxd fresnel_reflection(double grazing_rad, double eps_r,
                       double conductivity_s_m, double wavelength_m,
                       bool vertical);

// Builds the tap list for one snapshot. Tap 0 is the direct path with the
// loss of params.kind and delay distance/c; the two-ray kind adds the
// ground bounce with gain |reflection|*lambda/(4*pi*l_r) and delay l_r/c,
// reading geom.tx_alt_m / geom.rx_alt_m as heights above the reflecting
// plane (shift them before calling when the plane is not at zero).
// Phases follow from path length modulo wavelength. extra_mpcs carry
// absolute delays and are appended, then the whole list is sorted; taps
// whose delays agree within 1 ps are merged by complex addition.
// shadowing_db shifts every tap by the same amount (slow fading drawn by
// the caller). Throws when geom.distance_m <= 0.
ChannelRealization synth_channel(const LinkGeometry& geom,
                                 const PathLossModelParams& params,
                                 const std::vector<ChannelTap>& extra_mpcs = {},
                                 double shadowing_db = 0.0);

// Applies the tap model to a transmit block that repeats periodically, so
// each delay becomes a circular shift after quantization to the sample
// grid. Then rotates by the CFO and adds seeded white Gaussian noise.
// Sample units are sqrt(mW). Throws when a tap delay exceeds the block
// duration.
std::vector<cxf> apply_channel(const std::vector<cxf>& tx,
                               const ChannelRealization& channel,
                               const ImpairmentSpec& impairments,
                               double sample_rate_hz, std::uint64_t noise_seed);

// Link budget: tx_power - pl + tx_gain + rx_gain, all dB quantities.
double received_power_dbm(double tx_power_dbm, double pl_db,
                          double tx_gain_dbi = 0.0, double rx_gain_dbi = 0.0);

// Coherent power sum over taps, dB relative to unit transmit amplitude.
// Per-tap powers add (delays are distinct after the synth merge step).
double channel_gain_db(const ChannelRealization& channel);

// Tap-table line: {"time_ns":..., "taps":[{"delay_ns":...,
// "gain_db":..., "phase_rad":...}, ...]}. Used for ground-truth files.
std::string tap_table_json(const ChannelRealization& channel);
ChannelRealization tap_table_from_json(const std::string& line);

}  // namespace skysounder
