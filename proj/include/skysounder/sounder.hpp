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
#include <optional>
#include <string>
#include <vector>

#include "skysounder/common.hpp"
#include "skysounder/waveform.hpp"

namespace skysounder {

// One contiguous receive capture. Sample units are sqrt(mW).
struct IQSnapshot {
    std::vector<cxf> samples;
    double sample_rate_hz = 50e6;
    double center_freq_hz = 3.5e9;
    std::int64_t time_ns = 0;
};

// Absolute time interval, closed-open, nanoseconds.
struct TimeWindow {
    std::int64_t start_ns = 0;
    std::int64_t end_ns = 0;
};

// Circular correlation result over one sequence period of lags. Values
// keep the scale of the input samples: a unit-amplitude reference makes
// each peak the complex channel gain of that path.
struct CorrelationProfile {
    std::vector<cxd> lags;
    double sample_rate_hz = 50e6;
    double correlation_gain_db = 0.0;
    std::int64_t time_ns = 0;
};

struct CirTap {
    // Relative to the direct-path component; later arrivals are positive.
    double delay_s = 0.0;
    double rel_power_db = 0.0;
    cxd gain = {0.0, 0.0};
    // Channel gain in dB (receive minus transmit, pattern effects
    // removed); absent without absolute calibration.
    std::optional<double> abs_gain_db;
};

struct CirEstimate {
    std::vector<CirTap> taps;
    std::size_t dpc_index = 0;
    // Median profile power, dB in correlator-output units.
    double noise_floor_db = 0.0;
    double correlation_gain_db = 0.0;
    std::int64_t time_ns = 0;
    // Set when nothing clears the noise guard; taps is empty then.
    bool no_signal = false;
};

struct PowerDelayProfile {
    std::vector<double> delay_s;
    std::vector<double> power_db;
    std::int64_t time_ns = 0;
};

struct CirExtractConfig {
    // Retention limit below the direct-path power.
    double threshold_db = 20.0;
    // Everything must also clear the noise floor by this margin.
    double noise_guard_db = 6.0;
    // Combined pattern gain along the link, subtracted from absolute
    // powers so only channel effects remain.
    double antenna_correction_db = 0.0;
    // Transmit power behind the samples; enables absolute tap gains.
    std::optional<double> tx_power_dbm;
};

// Trims the capture to the window, cuts to whole sequence periods, and
// removes the DC offset. Returns nullopt (snapshot dropped) when no whole
// period overlaps the window. Throws on non-finite samples.
std::optional<IQSnapshot> preprocess(const IQSnapshot& snapshot,
                                     const waveform::SoundingFrame& frame,
                                     const TimeWindow& window);
// Full-window variant.
std::optional<IQSnapshot> preprocess(const IQSnapshot& snapshot,
                                     const waveform::SoundingFrame& frame);

// Residual carrier offset from the phase slope across per-period
// correlation peaks. Unambiguous within +-1/(2 T_period), 6.1 kHz for the
// default 81.9 us period. Returns nullopt when no peak clears the noise.
// Throws unless the snapshot holds at least two whole periods.
std::optional<double> estimate_cfo(const IQSnapshot& snapshot,
                                   const waveform::SoundingFrame& frame);

// Multiplies by exp(-j 2 pi cfo t), t = 0 at the first sample.
IQSnapshot derotate(const IQSnapshot& snapshot, double cfo_hz);

// Coherently averages the first `repeats` periods and circularly
// correlates against one reference period. Throws when the snapshot is
// shorter than repeats periods.
CorrelationProfile correlate(const IQSnapshot& snapshot,
                             const waveform::SoundingFrame& frame, unsigned repeats);

// Picks the direct path (earliest local maximum within 3 dB of the
// strongest), keeps local maxima within threshold_db of it that also
// clear the noise floor by noise_guard_db, and reports delays relative
// to the direct path. Throws on an empty profile.
CirEstimate extract_cir(const CorrelationProfile& profile,
                        const CirExtractConfig& config = {});

// Dense profile in dB relative to the direct-path power, delays signed
// around the direct path.
PowerDelayProfile compute_pdp(const CorrelationProfile& profile,
                              const CirEstimate& cir);
// Sparse variant from the retained taps alone.
PowerDelayProfile compute_pdp(const CirEstimate& cir);

// JSON-lines record: {time_ns, distance_m, taps:[{delay_ns,
// rel_power_db, abs_gain_db}], noise_floor_db}.
std::string cir_json(const CirEstimate& cir, double distance_m);

}  // namespace skysounder
