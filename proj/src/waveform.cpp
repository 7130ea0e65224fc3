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

#include "skysounder/waveform.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace skysounder::waveform {

namespace {

// Register lengths above this would make the measured-period check and the
// chip buffers unreasonably large for a sounding code.
constexpr unsigned k_max_degree = 24;

void validate_spec(const MSequenceSpec& spec) {
    if (spec.degree < 2 || spec.degree > k_max_degree)
        throw std::invalid_argument("m-sequence degree must be in 2.." + std::to_string(k_max_degree) +
                                    ", got " + std::to_string(spec.degree));
    if (spec.seed == 0)
        throw std::invalid_argument("m-sequence seed must be nonzero");
    if (spec.seed >> spec.degree)
        throw std::invalid_argument("m-sequence seed does not fit in " + std::to_string(spec.degree) + " bits");
    if (spec.taps.empty())
        throw std::invalid_argument("m-sequence taps are empty");
    bool has_degree = false;
    for (unsigned t : spec.taps) {
        if (t < 1 || t > spec.degree)
            throw std::invalid_argument("tap position " + std::to_string(t) + " outside 1.." +
                                        std::to_string(spec.degree));
        has_degree = has_degree || (t == spec.degree);
    }
    if (!has_degree)
        throw std::invalid_argument("taps must include the register length " + std::to_string(spec.degree));
}

} // namespace

std::vector<unsigned> default_taps(unsigned degree) {
    switch (degree) {
    case 2: return {2, 1};
    case 3: return {3, 1};
    case 4: return {4, 1};
    case 5: return {5, 2};
    case 6: return {6, 1};
    case 7: return {7, 1};
    case 8: return {8, 4, 3, 2};
    case 9: return {9, 4};
    case 10: return {10, 3};
    case 11: return {11, 2};
    case 12: return {12, 6, 4, 1};
    case 13: return {13, 4, 3, 1};
    case 14: return {14, 10, 6, 1};
    case 15: return {15, 1};
    case 16: return {16, 12, 3, 1};
    case 17: return {17, 3};
    case 18: return {18, 7};
    case 19: return {19, 5, 2, 1};
    case 20: return {20, 3};
    default:
        throw std::invalid_argument("no default feedback taps for degree " + std::to_string(degree) +
                                    " (supply taps explicitly)");
    }
}

MSequenceSpec default_spec(unsigned degree) {
    return MSequenceSpec{degree, default_taps(degree), 1};
}

std::vector<std::int8_t> generate_mseq(const MSequenceSpec& spec) {
    validate_spec(spec);

    const std::size_t period_want = spec.sequence_length();
    const std::uint32_t init = spec.seed;

    // Feedback = XOR of the register bits at exponents < degree, plus bit 0
    // for the implied constant term. Exponent e reads register bit e.
    std::uint32_t fb_mask = 1; // constant term
    for (unsigned t : spec.taps)
        if (t < spec.degree)
            fb_mask |= (std::uint32_t{1} << t);

    std::vector<std::int8_t> chips;
    chips.reserve(period_want);

    std::uint32_t state = init;
    std::size_t steps = 0;
    do {
        chips.push_back((state & 1) ? std::int8_t{-1} : std::int8_t{+1});
        std::uint32_t fb = std::uint32_t(std::popcount(state & fb_mask)) & 1u;
        state = (state >> 1) | (fb << (spec.degree - 1));
        ++steps;
        if (steps > period_want)
            break;
    } while (state != init);

    if (steps != period_want || state != init)
        throw std::invalid_argument("taps are not primitive: state period " +
                                    (steps > period_want ? std::string("exceeds ") + std::to_string(period_want)
                                                         : std::to_string(steps)) +
                                    ", expected " + std::to_string(period_want));
    return chips;
}

SoundingFrame build_frame(const MSequenceSpec& spec, int repeats, int samples_per_chip,
                          double chip_duration_s) {
    SoundingFrame frame = build_frame(generate_mseq(spec), repeats, samples_per_chip, chip_duration_s);
    frame.spec = spec;
    return frame;
}

SoundingFrame build_frame(std::vector<std::int8_t> chips, int repeats, int samples_per_chip,
                          double chip_duration_s) {
    if (repeats < 1)
        throw std::invalid_argument("frame repeats must be >= 1, got " + std::to_string(repeats));
    if (samples_per_chip < 1)
        throw std::invalid_argument("samples_per_chip must be >= 1, got " + std::to_string(samples_per_chip));
    if (chips.empty())
        throw std::invalid_argument("chip sequence is empty");
    if (chip_duration_s <= 0.0)
        throw std::invalid_argument("chip duration must be positive");
    for (std::int8_t c : chips)
        if (c != 1 && c != -1)
            throw std::invalid_argument("chip values must be exactly +-1");

    SoundingFrame frame;
    frame.chips = std::move(chips);
    frame.chip_duration_s = chip_duration_s;
    frame.repeats = repeats;
    frame.samples_per_chip = samples_per_chip;
    frame.spec = MSequenceSpec{0, {}, 0};
    return frame;
}

std::vector<cxf> frame_samples(const SoundingFrame& frame, double amplitude) {
    std::vector<cxf> out;
    out.reserve(frame.sample_count());
    for (int r = 0; r < frame.repeats; ++r)
        for (std::int8_t c : frame.chips)
            for (int s = 0; s < frame.samples_per_chip; ++s)
                out.emplace_back(float(amplitude * c), 0.0f);
    return out;
}

std::vector<cxd> reference_period(const SoundingFrame& frame) {
    return reference_correlator(frame.chips, 1, frame.samples_per_chip);
}

std::vector<cxd> reference_correlator(const std::vector<std::int8_t>& chips, int repeats,
                                      int samples_per_chip) {
    if (repeats < 1 || repeats > 20)
        throw std::invalid_argument("correlator repeats must be in 1..20, got " + std::to_string(repeats));
    if (samples_per_chip < 1)
        throw std::invalid_argument("samples_per_chip must be >= 1");
    std::vector<cxd> ref;
    ref.reserve(chips.size() * std::size_t(repeats) * std::size_t(samples_per_chip));
    for (int r = 0; r < repeats; ++r)
        for (std::int8_t c : chips)
            for (int s = 0; s < samples_per_chip; ++s)
                ref.emplace_back(double(c), 0.0);
    return ref;
}

double processing_gain_db(std::size_t sequence_length, int repeats) {
    return 10.0 * std::log10(double(sequence_length) * double(repeats));
}

std::vector<long long> periodic_autocorrelation(const std::vector<std::int8_t>& chips) {
    const std::size_t n = chips.size();
    std::vector<long long> acf(n, 0);
    for (std::size_t lag = 0; lag < n; ++lag) {
        long long sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = i + lag;
            if (j >= n)
                j -= n;
            sum += (long long)chips[i] * (long long)chips[j];
        }
        acf[lag] = sum;
    }
    return acf;
}

} // namespace skysounder::waveform
