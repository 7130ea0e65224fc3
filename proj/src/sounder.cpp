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

#include "skysounder/sounder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "json.hpp"
#include "skysounder/fft.hpp"

namespace skysounder {

namespace {

constexpr double k_pi = 3.14159265358979323846;
// Direct-path candidates must sit this close to the strongest peak.
constexpr double k_dpc_window_db = 3.0;
// A usable per-period peak must clear the median by this much.
constexpr double k_cfo_peak_guard_db = 10.0;

std::size_t period_of(const waveform::SoundingFrame& frame) {
    const std::size_t p = frame.period_samples();
    if (p == 0)
        throw std::invalid_argument("sounder: frame has an empty period");
    return p;
}

// Signed circular lag offset in [-n/2, n/2).
long long signed_offset(std::size_t lag, std::size_t ref, std::size_t n) {
    long long d = (static_cast<long long>(lag) - static_cast<long long>(ref)) %
                  static_cast<long long>(n);
    if (d < 0)
        d += static_cast<long long>(n);
    if (d >= static_cast<long long>(n / 2))
        d -= static_cast<long long>(n);
    return d;
}

std::vector<std::size_t> local_maxima(const std::vector<double>& power) {
    const std::size_t n = power.size();
    std::vector<std::size_t> out;
    if (n == 1)
        return {0};
    for (std::size_t i = 0; i < n; ++i) {
        const double prev = power[(i + n - 1) % n];
        const double next = power[(i + 1) % n];
        if (power[i] > prev && power[i] >= next)
            out.push_back(i);
    }
    return out;
}

}  // namespace

std::optional<IQSnapshot> preprocess(const IQSnapshot& snapshot,
                                     const waveform::SoundingFrame& frame,
                                     const TimeWindow& window) {
    if (snapshot.sample_rate_hz <= 0.0)
        throw std::invalid_argument("preprocess: sample rate must be positive");
    for (const auto& v : snapshot.samples)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::invalid_argument("preprocess: non-finite sample");

    const std::size_t n = snapshot.samples.size();
    const double ns_per_sample = 1e9 / snapshot.sample_rate_hz;
    const std::int64_t snap_end =
        snapshot.time_ns + std::int64_t(std::llround(double(n) * ns_per_sample));

    std::size_t i0 = 0, i1 = n;
    if (window.start_ns > snapshot.time_ns) {
        if (window.start_ns >= snap_end)
            return std::nullopt;
        i0 = static_cast<std::size_t>(std::ceil(
            double(window.start_ns - snapshot.time_ns) / ns_per_sample));
    }
    if (window.end_ns < snap_end) {
        if (window.end_ns <= snapshot.time_ns)
            return std::nullopt;
        i1 = static_cast<std::size_t>(std::floor(
            double(window.end_ns - snapshot.time_ns) / ns_per_sample));
    }
    if (i1 <= i0)
        return std::nullopt;

    // Whole periods only; partial tails would break coherent averaging.
    const std::size_t period = period_of(frame);
    const std::size_t kept = ((i1 - i0) / period) * period;
    if (kept == 0)
        return std::nullopt;

    IQSnapshot out;
    out.sample_rate_hz = snapshot.sample_rate_hz;
    out.center_freq_hz = snapshot.center_freq_hz;
    out.time_ns =
        snapshot.time_ns + std::int64_t(std::llround(double(i0) * ns_per_sample));
    out.samples.assign(snapshot.samples.begin() + std::ptrdiff_t(i0),
                       snapshot.samples.begin() + std::ptrdiff_t(i0 + kept));

    cxd mean = 0.0;
    for (const auto& v : out.samples)
        mean += cxd(v);
    mean /= double(out.samples.size());
    const cxf mean_f(static_cast<float>(mean.real()),
                     static_cast<float>(mean.imag()));
    for (auto& v : out.samples)
        v -= mean_f;
    return out;
}

std::optional<IQSnapshot> preprocess(const IQSnapshot& snapshot,
                                     const waveform::SoundingFrame& frame) {
    TimeWindow all;
    all.start_ns = std::numeric_limits<std::int64_t>::min();
    all.end_ns = std::numeric_limits<std::int64_t>::max();
    return preprocess(snapshot, frame, all);
}

std::optional<double> estimate_cfo(const IQSnapshot& snapshot,
                                   const waveform::SoundingFrame& frame) {
    const std::size_t period = period_of(frame);
    const std::size_t periods = snapshot.samples.size() / period;
    if (periods < 2)
        throw std::invalid_argument(
            "cfo estimate: need at least two whole periods");

    const auto ref = reference_period(frame);
    std::vector<cxd> refd(ref.begin(), ref.end());
    dsp::CircularCorrelator corr(refd);

    std::vector<std::vector<cxd>> profiles(periods);
    std::vector<double> noncoherent(period, 0.0);
    std::vector<cxd> block(period);
    for (std::size_t p = 0; p < periods; ++p) {
        for (std::size_t i = 0; i < period; ++i)
            block[i] = cxd(snapshot.samples[p * period + i]);
        profiles[p] = corr.correlate(block);
        for (std::size_t i = 0; i < period; ++i)
            noncoherent[i] += std::norm(profiles[p][i]);
    }

    const std::size_t peak =
        std::size_t(std::max_element(noncoherent.begin(), noncoherent.end()) -
                    noncoherent.begin());
    std::vector<double> sorted = noncoherent;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                     sorted.end());
    const double floor = sorted[sorted.size() / 2];
    if (noncoherent[peak] <
        floor * power_from_db(k_cfo_peak_guard_db))
        return std::nullopt;

    // Unwrapped peak phases against period index; the regression slope is
    // the rotation per period.
    std::vector<double> phase(periods);
    phase[0] = std::arg(profiles[0][peak]);
    for (std::size_t p = 1; p < periods; ++p) {
        const double raw = std::arg(profiles[p][peak]);
        phase[p] =
            phase[p - 1] + std::remainder(raw - phase[p - 1], 2.0 * k_pi);
    }
    const double n = double(periods);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t p = 0; p < periods; ++p) {
        sx += double(p);
        sy += phase[p];
        sxx += double(p) * double(p);
        sxy += double(p) * phase[p];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

    const double t_period = double(period) / snapshot.sample_rate_hz;
    return slope / (2.0 * k_pi * t_period);
}

IQSnapshot derotate(const IQSnapshot& snapshot, double cfo_hz) {
    IQSnapshot out = snapshot;
    if (cfo_hz == 0.0)
        return out;
    const double step = -2.0 * k_pi * cfo_hz / snapshot.sample_rate_hz;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const cxd v = cxd(out.samples[i]) * std::polar(1.0, step * double(i));
        out.samples[i] = cxf(static_cast<float>(v.real()),
                             static_cast<float>(v.imag()));
    }
    return out;
}

CorrelationProfile correlate(const IQSnapshot& snapshot,
                             const waveform::SoundingFrame& frame, unsigned repeats) {
    if (repeats == 0)
        throw std::invalid_argument("correlate: repeats must be positive");
    const std::size_t period = period_of(frame);
    if (snapshot.samples.size() < std::size_t(repeats) * period)
        throw std::invalid_argument(
            "correlate: snapshot of " + std::to_string(snapshot.samples.size()) +
            " samples is shorter than " + std::to_string(repeats) +
            " periods of " + std::to_string(period));

    std::vector<cxd> avg(period, cxd{0.0, 0.0});
    for (unsigned r = 0; r < repeats; ++r)
        for (std::size_t i = 0; i < period; ++i)
            avg[i] += cxd(snapshot.samples[std::size_t(r) * period + i]);
    for (auto& v : avg)
        v /= double(repeats);

    const auto ref = reference_period(frame);
    std::vector<cxd> refd(ref.begin(), ref.end());
    dsp::CircularCorrelator corr(refd);

    CorrelationProfile out;
    out.lags = corr.correlate(avg);
    out.sample_rate_hz = snapshot.sample_rate_hz;
    out.correlation_gain_db =
        waveform::processing_gain_db(frame.chips.size() * frame.samples_per_chip, repeats);
    out.time_ns = snapshot.time_ns;
    return out;
}

CirEstimate extract_cir(const CorrelationProfile& profile,
                        const CirExtractConfig& config) {
    if (profile.lags.empty())
        throw std::invalid_argument("extract_cir: empty profile");
    const std::size_t n = profile.lags.size();

    std::vector<double> power(n);
    for (std::size_t i = 0; i < n; ++i)
        power[i] = std::norm(profile.lags[i]);

    std::vector<double> sorted = power;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                     sorted.end());
    const double floor = sorted[sorted.size() / 2];
    const double guard = floor * power_from_db(config.noise_guard_db);

    CirEstimate out;
    // Clamp so an all-zero profile reports a finite floor.
    out.noise_floor_db = db_from_power(std::max(floor, 1e-40));
    out.correlation_gain_db = profile.correlation_gain_db;
    out.time_ns = profile.time_ns;

    const auto maxima = local_maxima(power);
    const std::size_t global =
        std::size_t(std::max_element(power.begin(), power.end()) -
                    power.begin());
    // "Above" is strict so a flat profile (all lags equal, e.g. silence)
    // reports no signal instead of electing an arbitrary direct path.
    if (power[global] <= guard) {
        out.no_signal = true;
        return out;
    }

    // Direct path: earliest candidate within the window below the global
    // peak, earliest meaning the most negative circular offset from it.
    const double dpc_min = power[global] / power_from_db(k_dpc_window_db);
    std::size_t dpc = global;
    long long dpc_off = 0;
    for (const auto m : maxima) {
        if (power[m] < dpc_min || power[m] < guard)
            continue;
        const long long off = signed_offset(m, global, n);
        if (off < dpc_off) {
            dpc_off = off;
            dpc = m;
        }
    }

    const double keep_min = power[dpc] / power_from_db(config.threshold_db);
    for (const auto m : maxima) {
        if (power[m] < keep_min || power[m] < guard)
            continue;
        CirTap tap;
        tap.delay_s = double(signed_offset(m, dpc, n)) / profile.sample_rate_hz;
        tap.rel_power_db = db_from_power(power[m] / power[dpc]);
        tap.gain = profile.lags[m];
        if (config.tx_power_dbm)
            tap.abs_gain_db = db_from_power(power[m]) - *config.tx_power_dbm -
                              config.antenna_correction_db;
        out.taps.push_back(tap);
    }
    std::sort(out.taps.begin(), out.taps.end(),
              [](const CirTap& a, const CirTap& b) {
                  return a.delay_s < b.delay_s;
              });
    for (std::size_t i = 0; i < out.taps.size(); ++i)
        if (out.taps[i].delay_s == 0.0)
            out.dpc_index = i;
    return out;
}

PowerDelayProfile compute_pdp(const CorrelationProfile& profile,
                              const CirEstimate& cir) {
    if (profile.lags.empty())
        throw std::invalid_argument("compute_pdp: empty profile");
    if (cir.no_signal || cir.taps.empty())
        throw std::invalid_argument("compute_pdp: no direct path available");
    const std::size_t n = profile.lags.size();

    // Recover the direct path's absolute lag from its profile value.
    const cxd dpc_gain = cir.taps[cir.dpc_index].gain;
    std::size_t dpc_lag = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (profile.lags[i] == dpc_gain) {
            dpc_lag = i;
            break;
        }
    const double dpc_power = std::norm(dpc_gain);

    PowerDelayProfile out;
    out.time_ns = cir.time_ns;
    out.delay_s.resize(n);
    out.power_db.resize(n);
    std::vector<std::pair<double, double>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double delay =
            double(signed_offset(i, dpc_lag, n)) / profile.sample_rate_hz;
        rows[i] = {delay, db_from_power(std::norm(profile.lags[i]) / dpc_power)};
    }
    std::sort(rows.begin(), rows.end());
    for (std::size_t i = 0; i < n; ++i) {
        out.delay_s[i] = rows[i].first;
        out.power_db[i] = rows[i].second;
    }
    return out;
}

PowerDelayProfile compute_pdp(const CirEstimate& cir) {
    if (cir.no_signal || cir.taps.empty())
        throw std::invalid_argument("compute_pdp: no direct path available");
    PowerDelayProfile out;
    out.time_ns = cir.time_ns;
    for (const auto& tap : cir.taps) {
        out.delay_s.push_back(tap.delay_s);
        out.power_db.push_back(tap.rel_power_db);
    }
    return out;
}

std::string cir_json(const CirEstimate& cir, double distance_m) {
    nlohmann::json j;
    j["time_ns"] = cir.time_ns;
    j["distance_m"] = distance_m;
    j["noise_floor_db"] = cir.noise_floor_db;
    j["no_signal"] = cir.no_signal;
    auto& arr = j["taps"] = nlohmann::json::array();
    for (const auto& tap : cir.taps) {
        nlohmann::json t;
        t["delay_ns"] = tap.delay_s * 1e9;
        t["rel_power_db"] = tap.rel_power_db;
        if (tap.abs_gain_db)
            t["abs_gain_db"] = *tap.abs_gain_db;
        else
            t["abs_gain_db"] = nullptr;
        arr.push_back(t);
    }
    return j.dump();
}

}  // namespace skysounder
