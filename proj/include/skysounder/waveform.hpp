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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "skysounder/common.hpp"

namespace skysounder::waveform {

// Fibonacci LFSR over GF(2). `taps` lists the exponents of the feedback
// polynomial; the register length (= degree) must be among them and the
// constant term is implied, so {12, 6, 4, 1} means x^12 + x^6 + x^4 + x + 1.
// Maximality is not taken on trust: generation measures the state period and
// rejects any polynomial that does not reach 2^degree - 1.
struct MSequenceSpec {
    unsigned degree = 12;
    std::vector<unsigned> taps = {12, 6, 4, 1};
    std::uint32_t seed = 1; // nonzero initial register state

    std::size_t sequence_length() const { return (std::size_t{1} << degree) - 1; }
};

// Known-primitive feedback taps for register lengths 2..20.
std::vector<unsigned> default_taps(unsigned degree);

MSequenceSpec default_spec(unsigned degree = 12);

// One period of the bipolar m-sequence, 2^degree - 1 chips.
// Register bit 0 maps to chip +1, bit 1 to chip -1.
// Throws std::invalid_argument on a zero seed or non-maximal taps.
std::vector<std::int8_t> generate_mseq(const MSequenceSpec& spec);

// Sounding frame: one chip period plus the expansion parameters. Expanded
// sample count is chips.size() * repeats * samples_per_chip; chips stay
// exactly +-1 (rectangular, no shaping).
struct SoundingFrame {
    std::vector<std::int8_t> chips;
    double chip_duration_s = 20e-9;
    int repeats = 1;
    int samples_per_chip = 1;
    MSequenceSpec spec; // recorded for the sidecar so runs can be reproduced

    std::size_t period_samples() const { return chips.size() * std::size_t(samples_per_chip); }
    std::size_t sample_count() const { return period_samples() * std::size_t(repeats); }
    double sample_rate_hz() const { return double(samples_per_chip) / chip_duration_s; }
};

SoundingFrame build_frame(const MSequenceSpec& spec, int repeats, int samples_per_chip = 1,
                          double chip_duration_s = 20e-9);

// Same, for a caller-supplied chip period (spec metadata left empty).
SoundingFrame build_frame(std::vector<std::int8_t> chips, int repeats, int samples_per_chip = 1,
                          double chip_duration_s = 20e-9);

// Complex baseband samples of the frame: chips on I, zero Q, scaled by
// `amplitude`. Each chip is held for samples_per_chip samples.
std::vector<cxf> frame_samples(const SoundingFrame& frame, double amplitude = 1.0);

// One period of the correlation reference on the frame's sample grid.
std::vector<cxd> reference_period(const SoundingFrame& frame);

// The repeated reference used by the coherent correlator. Correlating
// against it yields a processing gain of 10*log10(length * repeats) dB.
// `repeats` must lie in 1..20 (a snapshot holds at most 20 periods).
std::vector<cxd> reference_correlator(const std::vector<std::int8_t>& chips, int repeats,
                                      int samples_per_chip = 1);

double processing_gain_db(std::size_t sequence_length, int repeats);

// Exact periodic autocorrelation at every lag, integer arithmetic.
// An m-sequence gives L at lag 0 and -1 everywhere else.
std::vector<long long> periodic_autocorrelation(const std::vector<std::int8_t>& chips);

} // namespace skysounder::waveform
