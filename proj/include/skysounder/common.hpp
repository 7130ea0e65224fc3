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

#include <cmath>
#include <complex>
#include <cstdint>

namespace skysounder {

using cxd = std::complex<double>;
using cxf = std::complex<float>;

inline constexpr double speed_of_light_mps = 299792458.0;

inline double db_from_power(double p) { return 10.0 * std::log10(p); }
inline double power_from_db(double db) { return std::pow(10.0, db / 10.0); }
inline double db_from_amplitude(double a) { return 20.0 * std::log10(a); }
inline double amplitude_from_db(double db) { return std::pow(10.0, db / 20.0); }

inline double wavelength_m(double freq_hz) { return speed_of_light_mps / freq_hz; }

// Mixes a coarse seed with a stream index into an independent 64-bit seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace skysounder
