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

#include "doctest.h"

#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "skysounder/chanmodel.hpp"
#include "skysounder/metrics.hpp"
#include "skysounder/sounder.hpp"

using namespace skysounder;
using namespace skysounder::metrics;

namespace {

// Hand-built estimate: (gain, delay) pairs, direct path at delay zero.
CirEstimate cir_of(const std::vector<std::pair<cxd, double>>& taps) {
    CirEstimate cir;
    double pmax = 0.0;
    for (const auto& [g, d] : taps)
        pmax = std::max(pmax, std::norm(g));
    for (std::size_t i = 0; i < taps.size(); ++i) {
        CirTap t;
        t.gain = taps[i].first;
        t.delay_s = taps[i].second;
        t.rel_power_db = 10.0 * std::log10(std::norm(t.gain) / pmax);
        cir.taps.push_back(t);
        if (t.delay_s == 0.0)
            cir.dpc_index = i;
    }
    cir.noise_floor_db = -120.0;
    return cir;
}

double density_for_snr(double amplitude, double snr_db, double fs) {
    return 10.0 * std::log10(amplitude * amplitude) - snr_db -
           10.0 * std::log10(fs);
}

IQSnapshot make_snapshot(const waveform::SoundingFrame& frame,
                         const ChannelRealization& ch,
                         const ImpairmentSpec& imp, double amplitude,
                         std::uint64_t seed, std::int64_t time_ns = 0) {
    IQSnapshot snap;
    snap.sample_rate_hz = frame.sample_rate_hz();
    snap.samples = apply_channel(waveform::frame_samples(frame, amplitude),
                                 ch, imp, snap.sample_rate_hz, seed);
    snap.time_ns = time_ns;
    return snap;
}

ImpairmentSpec no_noise() {
    ImpairmentSpec imp;
    imp.noise_density_dbm_hz = -std::numeric_limits<double>::infinity();
    return imp;
}

}  // namespace

TEST_CASE("delay spread: closed-form two-point profiles") {
    // A lone direct path has no dispersion.
    auto single = rms_delay_spread(cir_of({{cxd{0.7, 0.2}, 0.0}}));
    CHECK(single.sigma_tau_s == 0.0);
    CHECK(single.mean_excess_delay_s == 0.0);
    CHECK(!single.coherence_bw_hz.has_value());

    // Equal powers at 0 and 100 ns: mean 50 ns, spread 50 ns.
    auto even = rms_delay_spread(
        cir_of({{cxd{1.0, 0.0}, 0.0}, {std::polar(1.0, 2.1), 100e-9}}));
    CHECK(std::abs(even.mean_excess_delay_s - 50e-9) < 1e-15);
    CHECK(std::abs(even.sigma_tau_s - 50e-9) < 1e-15);
    REQUIRE(even.coherence_bw_hz.has_value());
    CHECK(*even.coherence_bw_hz == doctest::Approx(20e6).epsilon(1e-9));

    // 0 dB and -6 dB at 0 and 100 ns. Weights (1, 10^-0.6); evaluating the
    // weighted moments by hand gives mean 20.076 ns, spread 40.057 ns.
    const double a2 = std::pow(10.0, -6.0 / 20.0);
    auto skew = rms_delay_spread(
        cir_of({{cxd{a2, 0.0}, 100e-9}, {cxd{1.0, 0.0}, 0.0}}));
    CHECK(std::abs(skew.mean_excess_delay_s - 20.08e-9) < 0.05e-9);
    CHECK(std::abs(skew.sigma_tau_s - 40.06e-9) < 0.05e-9);
    CHECK(mean_excess_delay(cir_of({{cxd{a2, 0.0}, 100e-9},
                                    {cxd{1.0, 0.0}, 0.0}})) ==
          doctest::Approx(skew.mean_excess_delay_s));

    // Context fields pass through.
    CirEstimate ctx = cir_of({{cxd{1.0, 0.0}, 0.0}});
    ctx.time_ns = 1234567;
    auto res = rms_delay_spread(ctx, 321.5);
    CHECK(res.time_ns == 1234567);
    CHECK(res.distance_m == 321.5);

    CirEstimate empty;
    empty.no_signal = true;
    CHECK_THROWS_AS(rms_delay_spread(empty), std::invalid_argument);
    CHECK_THROWS_AS(mean_excess_delay(empty), std::invalid_argument);
}

TEST_CASE("delay spread: scaling and translation invariance, extent bound") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> amp(0.1, 1.0);
    std::uniform_real_distribution<double> del(0.0, 2e-6);
    std::uniform_real_distribution<double> ph(-3.14, 3.14);
    std::uniform_int_distribution<int> count(2, 6);

    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::pair<cxd, double>> taps{{cxd{1.0, 0.0}, 0.0}};
        const int extra = count(rng);
        for (int i = 0; i < extra; ++i)
            taps.push_back({std::polar(amp(rng), ph(rng)), del(rng)});
        const auto base = rms_delay_spread(cir_of(taps));

        // Uniform complex gain on every tap leaves the spread untouched.
        auto scaled = taps;
        for (auto& [g, d] : scaled)
            g *= cxd{-2.0, 5.0};
        const auto s = rms_delay_spread(cir_of(scaled));
        CHECK(s.sigma_tau_s == doctest::Approx(base.sigma_tau_s).epsilon(1e-9));
        CHECK(s.mean_excess_delay_s ==
              doctest::Approx(base.mean_excess_delay_s).epsilon(1e-9));

        // Shifting every delay moves the mean but not the central moment.
        auto shifted = taps;
        for (auto& [g, d] : shifted)
            d += 300e-9;
        const auto t = rms_delay_spread(cir_of(shifted));
        CHECK(std::abs(t.sigma_tau_s - base.sigma_tau_s) <
              1e-9 * std::max(base.sigma_tau_s, 1e-12));
        CHECK(t.mean_excess_delay_s ==
              doctest::Approx(base.mean_excess_delay_s + 300e-9)
                  .epsilon(1e-9));

        // The spread never exceeds half the delay extent.
        double lo = taps.front().second;
        double hi = lo;
        for (const auto& [g, d] : taps) {
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        CHECK(base.sigma_tau_s <= (hi - lo) / 2.0 + 1e-15);
    }

    // Equality holds when power splits evenly between the two extremes.
    auto split = rms_delay_spread(
        cir_of({{cxd{0.5, 0.0}, 0.0}, {cxd{0.0, 0.5}, 400e-9}}));
    CHECK(split.sigma_tau_s == doctest::Approx(200e-9).epsilon(1e-12));
}

TEST_CASE("coherence bandwidth is the reciprocal of the spread") {
    auto bw = coherence_bandwidth(50e-9);
    REQUIRE(bw.has_value());
    CHECK(*bw == doctest::Approx(20e6).epsilon(1e-12));

    // Spread of 10.983 ns corresponds to about 91.05 MHz.
    auto bw2 = coherence_bandwidth(10.983e-9);
    REQUIRE(bw2.has_value());
    CHECK(std::abs(*bw2 - 91.05e6) < 0.01e6);

    CHECK(!coherence_bandwidth(0.0).has_value());
    CHECK_THROWS_AS(coherence_bandwidth(-1e-9), std::invalid_argument);

    // Product with the spread is one whenever defined.
    for (double s : {1e-9, 3.7e-8, 5e-7, 2.2e-6}) {
        auto b = coherence_bandwidth(s);
        REQUIRE(b.has_value());
        CHECK(std::abs(*b * s - 1.0) < 1e-12);
    }
}

TEST_CASE("path loss from an estimate recovers the injected link budget") {
    auto frame = waveform::build_frame(waveform::default_spec(12), 4);
    const double fs = frame.sample_rate_hz();

    // Identity channel with a 0 dBm budget: zero loss.
    ChannelRealization ident;
    ident.taps.push_back({1.0, 0.0, 0.0});
    auto snap0 = make_snapshot(frame, ident, no_noise(), 1.0, 3);
    CirExtractConfig cal0;
    cal0.tx_power_dbm = 0.0;
    auto cir0 = extract_cir(correlate(snap0, frame, 4), cal0);
    auto pl0 = path_loss_from_cir(cir0, 0.0, 0.0);
    CHECK(std::abs(pl0.pl_db) < 1e-6);

    // 80 dB of path loss, 30 dBm transmit, 20 dB chip SNR at the receiver.
    const double tx_amp = amplitude_from_db(30.0);
    ChannelRealization faded;
    faded.taps.push_back({1e-4, 0.4, 0.0});
    ImpairmentSpec imp;
    imp.noise_density_dbm_hz = density_for_snr(tx_amp * 1e-4, 20.0, fs);
    auto snap = make_snapshot(frame, faded, imp, tx_amp, 17, 5000);
    CirExtractConfig cal;
    cal.tx_power_dbm = 30.0;
    auto cir = extract_cir(correlate(snap, frame, 4), cal);
    auto pl = path_loss_from_cir(cir, 30.0, 0.0, 250.0);
    CHECK(std::abs(pl.pl_db - 80.0) < 0.5);
    CHECK(pl.distance_m == 250.0);
    CHECK(pl.time_ns == 5000);

    // Raising transmit power raises received power equally: loss unchanged.
    const double tx_amp2 = amplitude_from_db(33.0);
    auto snap2 = make_snapshot(frame, faded, no_noise(), tx_amp2, 17);
    CirExtractConfig cal2;
    cal2.tx_power_dbm = 33.0;
    auto cir2 = extract_cir(correlate(snap2, frame, 4), cal2);
    auto snap3 = make_snapshot(frame, faded, no_noise(), tx_amp, 17);
    auto cir3 = extract_cir(correlate(snap3, frame, 4), cal);
    const double pl_hi = path_loss_from_cir(cir2, 33.0, 0.0).pl_db;
    const double pl_lo = path_loss_from_cir(cir3, 30.0, 0.0).pl_db;
    // Samples are stored single precision, so the cancellation is only
    // exact to the float quantization of the two amplitudes.
    CHECK(std::abs(pl_hi - pl_lo) < 1e-6);

    // The budget formula agrees with summing the calibrated tap gains.
    ChannelRealization two;
    two.taps.push_back({1e-4, 0.0, 0.0});
    two.taps.push_back({0.5e-4, 1.0, 300e-9});
    auto snap4 = make_snapshot(frame, two, no_noise(), tx_amp, 9);
    auto cir4 = extract_cir(correlate(snap4, frame, 4), cal);
    REQUIRE(cir4.taps.size() == 2);
    double sum_mw = 0.0;
    for (const auto& t : cir4.taps) {
        REQUIRE(t.abs_gain_db.has_value());
        sum_mw += power_from_db(*t.abs_gain_db);
    }
    const double via_gains = -10.0 * std::log10(sum_mw);
    const double via_budget = path_loss_from_cir(cir4, 30.0, 0.0).pl_db;
    CHECK(via_budget == doctest::Approx(via_gains).epsilon(1e-12));

    // An uncalibrated estimate cannot produce an absolute loss.
    auto uncal = extract_cir(correlate(snap, frame, 4), {});
    CHECK_THROWS_AS(path_loss_from_cir(uncal, 30.0, 0.0),
                    std::invalid_argument);

    CirEstimate none;
    none.no_signal = true;
    CHECK_THROWS_AS(path_loss_from_cir(none, 30.0, 0.0),
                    std::invalid_argument);
}

TEST_CASE("path loss fit: noiseless generator is recovered exactly") {
    std::vector<PathLossSample> samples;
    for (int i = 0; i < 100; ++i) {
        PathLossSample s;
        s.distance_m = 85.0 + 1000.0 * double(i) / 99.0;
        s.pl_db = log_distance_pl_db(s.distance_m, 34.650, 2.166, 1.0);
        s.time_ns = i;
        samples.push_back(s);
    }
    auto fit = fit_path_loss(samples, 1.0);
    CHECK(std::abs(fit.eta - 2.166) < 1e-9);
    CHECK(std::abs(fit.pl0_db - 34.650) < 1e-6);
    CHECK(fit.sigma_zeta_db < 1e-9);
    CHECK(fit.count == 100);
    CHECK(fit.d0_m == 1.0);
}

TEST_CASE("path loss fit: shadowing perturbs the slope only slightly") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> shadow(0.0, 2.0);
    std::vector<PathLossSample> samples;
    for (int i = 0; i < 3333; ++i) {
        PathLossSample s;
        s.distance_m = 85.0 + 1000.0 * double(i) / 3332.0;
        s.pl_db =
            log_distance_pl_db(s.distance_m, 41.320, 1.934, 1.0) + shadow(rng);
        samples.push_back(s);
    }
    auto fit = fit_path_loss(samples, 1.0);
    CHECK(std::abs(fit.eta - 1.934) < 0.05);
    CHECK(std::abs(fit.sigma_zeta_db - 2.0) < 0.1);
    CHECK(fit.count == 3333);
}

TEST_CASE("path loss fit: two points define the line; degenerate input") {
    std::vector<PathLossSample> two{{10.0, 60.0, 0}, {100.0, 80.0, 1}};
    auto fit = fit_path_loss(two, 1.0);
    CHECK(fit.eta == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.pl0_db == doctest::Approx(40.0).epsilon(1e-12));
    CHECK(fit.sigma_zeta_db < 1e-9);

    CHECK_THROWS_AS(fit_path_loss({}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(fit_path_loss({{10.0, 60.0, 0}}, 1.0),
                    std::invalid_argument);
    std::vector<PathLossSample> flat{{50.0, 70.0, 0},
                                     {50.0, 71.0, 1},
                                     {50.0, 69.0, 2}};
    CHECK_THROWS_AS(fit_path_loss(flat, 1.0), std::invalid_argument);
    std::vector<PathLossSample> close{{0.5, 60.0, 0}, {100.0, 80.0, 1}};
    CHECK_THROWS_AS(fit_path_loss(close, 1.0), std::invalid_argument);
    std::vector<PathLossSample> bad{
        {10.0, std::numeric_limits<double>::quiet_NaN(), 0},
        {100.0, 80.0, 1}};
    CHECK_THROWS_AS(fit_path_loss(bad, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(fit_path_loss(two, 0.0), std::invalid_argument);
}

TEST_CASE("campaign statistics: descriptive summary of the spreads") {
    auto mk = [](double s) {
        DelaySpreadResult r;
        r.sigma_tau_s = s;
        return r;
    };

    auto one = campaign_stats({mk(7e-9)});
    CHECK(one.mean_s == 7e-9);
    CHECK(one.median_s == 7e-9);
    CHECK(one.min_s == 7e-9);
    CHECK(one.max_s == 7e-9);
    CHECK(one.std_s == 0.0);

    // {4, 8, 12} ns: mean 8, median 8, population deviation sqrt(32/3).
    auto three = campaign_stats({mk(12e-9), mk(4e-9), mk(8e-9)});
    CHECK(three.mean_s == doctest::Approx(8e-9).epsilon(1e-12));
    CHECK(three.median_s == doctest::Approx(8e-9).epsilon(1e-12));
    CHECK(std::abs(three.std_s - 3.266e-9) < 1e-12);
    CHECK(three.min_s == 4e-9);
    CHECK(three.max_s == 12e-9);

    // Even count: median averages the middle pair.
    auto four = campaign_stats({mk(4e-9), mk(1e-9), mk(3e-9), mk(2e-9)});
    CHECK(four.median_s == doctest::Approx(2.5e-9).epsilon(1e-12));

    std::mt19937_64 rng(57);
    std::uniform_real_distribution<double> val(0.0, 100e-9);
    std::uniform_int_distribution<int> count(1, 40);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<DelaySpreadResult> rs;
        const int n = count(rng);
        for (int i = 0; i < n; ++i)
            rs.push_back(mk(val(rng)));
        auto st = campaign_stats(rs);
        CHECK(st.min_s <= st.median_s);
        CHECK(st.median_s <= st.max_s);
        CHECK(st.min_s <= st.mean_s);
        CHECK(st.mean_s <= st.max_s);
        CHECK(st.std_s >= 0.0);
        CHECK(st.std_s <= (st.max_s - st.min_s) / 2.0 + 1e-15);
    }

    CHECK_THROWS_AS(campaign_stats({}), std::invalid_argument);
}
