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

#include <complex>
#include <random>
#include <vector>

#include "skysounder/waveform.hpp"

using namespace skysounder;
using namespace skysounder::waveform;

namespace {

// Test-local periodic autocorrelation, written independently of the library.
std::vector<long long> naive_acf(const std::vector<std::int8_t>& c) {
    const std::size_t n = c.size();
    std::vector<long long> acf(n, 0);
    for (std::size_t lag = 0; lag < n; ++lag)
        for (std::size_t i = 0; i < n; ++i)
            acf[lag] += (long long)c[i] * (long long)c[(i + lag) % n];
    return acf;
}

// Test-local circular correlation of a complex signal against one chip
// period, evaluated at every lag of the full buffer.
std::vector<std::complex<double>> naive_corr(const std::vector<std::complex<double>>& y,
                                             const std::vector<std::int8_t>& period) {
    const std::size_t n = y.size();
    const std::size_t p = period.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t lag = 0; lag < n; ++lag) {
        std::complex<double> acc = 0.0;
        for (std::size_t i = 0; i < p; ++i)
            acc += y[(lag + i) % n] * double(period[i]);
        out[lag] = acc / double(p);
    }
    return out;
}

} // namespace

TEST_CASE("m-sequence: degree 12 has length 4095 and the two-valued autocorrelation") {
    auto chips = generate_mseq(default_spec(12));
    REQUIRE(chips.size() == 4095);

    auto acf = periodic_autocorrelation(chips);
    CHECK(acf[0] == 4095);
    for (std::size_t lag = 1; lag < acf.size(); ++lag)
        REQUIRE(acf[lag] == -1);
}

TEST_CASE("m-sequence: degree 2 toy case enumerated by hand") {
    MSequenceSpec spec{2, {2, 1}, 0b01};
    auto chips = generate_mseq(spec);
    REQUIRE(chips.size() == 3);

    auto acf = naive_acf(chips);
    CHECK(acf[0] == 3);
    CHECK(acf[1] == -1);
    CHECK(acf[2] == -1);

    // library and test-local autocorrelation agree
    CHECK(periodic_autocorrelation(chips) == acf);
}

TEST_CASE("m-sequence: balance property, tallied directly") {
    for (unsigned degree : {5u, 8u, 12u}) {
        auto chips = generate_mseq(default_spec(degree));
        long long pos = 0, neg = 0;
        for (auto c : chips)
            (c > 0 ? pos : neg)++;
        long long diff = pos - neg;
        CAPTURE(degree);
        CHECK((diff == 1 || diff == -1));
    }
}

TEST_CASE("m-sequence: every default tap set is maximal") {
    for (unsigned degree = 2; degree <= 20; ++degree) {
        CAPTURE(degree);
        auto chips = generate_mseq(default_spec(degree));
        CHECK(chips.size() == (std::size_t{1} << degree) - 1);
    }
}

TEST_CASE("m-sequence: invalid specs are rejected") {
    CHECK_THROWS_AS(generate_mseq(MSequenceSpec{12, {12, 6, 4, 1}, 0}), std::invalid_argument);
    // x^4 + x^2 + 1 = (x^2 + x + 1)^2 is reducible, so the period falls short
    CHECK_THROWS_AS(generate_mseq(MSequenceSpec{4, {4, 2}, 1}), std::invalid_argument);
    // taps without the register length itself
    CHECK_THROWS_AS(generate_mseq(MSequenceSpec{4, {3, 1}, 1}), std::invalid_argument);
    CHECK_THROWS_AS(generate_mseq(MSequenceSpec{1, {1}, 1}), std::invalid_argument);
    CHECK_THROWS_AS(generate_mseq(MSequenceSpec{4, {4, 5}, 1}), std::invalid_argument);
}

TEST_CASE("frame: sample counts") {
    auto spec = default_spec(12);
    CHECK(build_frame(spec, 8, 1).sample_count() == 32760);
    CHECK(build_frame(spec, 20, 1).sample_count() == 81900); // one full RX snapshot

    auto tiny = build_frame(std::vector<std::int8_t>{+1, -1, -1}, 2, 2);
    CHECK(tiny.sample_count() == 12);
    auto samples = frame_samples(tiny);
    REQUIRE(samples.size() == 12);
    // each chip held for two samples
    const float want[12] = {1, 1, -1, -1, -1, -1, 1, 1, -1, -1, -1, -1};
    for (int i = 0; i < 12; ++i) {
        CHECK(samples[i].real() == want[i]);
        CHECK(samples[i].imag() == 0.0f);
    }
}

TEST_CASE("frame: invalid arguments are rejected") {
    auto spec = default_spec(10);
    CHECK_THROWS_AS(build_frame(spec, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_frame(spec, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_frame(std::vector<std::int8_t>{1, 0, -1}, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(reference_correlator(generate_mseq(spec), 21), std::invalid_argument);
    CHECK_THROWS_AS(reference_correlator(generate_mseq(spec), 0), std::invalid_argument);
}

TEST_CASE("correlator reference: processing gain values") {
    CHECK(processing_gain_db(4095, 1) == doctest::Approx(36.12).epsilon(0.0005));
    CHECK(processing_gain_db(4095, 4) == doctest::Approx(42.14).epsilon(0.0005));
    CHECK(processing_gain_db(4095, 8) == doctest::Approx(45.15).epsilon(0.0005));

    auto chips = generate_mseq(default_spec(12));
    CHECK(reference_correlator(chips, 4).size() == 4 * 4095);
}

TEST_CASE("frame of R repeats correlated against one period gives R aligned peaks") {
    auto spec = default_spec(6); // L = 63
    auto frame = build_frame(spec, 4);
    auto samples = frame_samples(frame);

    std::vector<std::complex<double>> y(samples.begin(), samples.end());
    auto corr = naive_corr(y, frame.chips);

    const std::size_t L = frame.chips.size();
    for (std::size_t lag = 0; lag < corr.size(); ++lag) {
        double v = std::abs(corr[lag]);
        if (lag % L == 0)
            CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
        else
            CHECK(v == doctest::Approx(1.0 / double(L)).epsilon(1e-9));
    }
}

TEST_CASE("correlation SNR gain over AWGN matches 10*log10(L*R)") {
    // Independent Monte-Carlo oracle at a small degree, with the correlation
    // done by the test-local routine.
    auto spec = default_spec(8); // L = 255
    const std::size_t L = 255;
    auto frame = build_frame(spec, 8);
    auto clean_f = frame_samples(frame);
    std::vector<std::complex<double>> clean(clean_f.begin(), clean_f.end());

    const double noise_var = 3.1623; // chip SNR of -5 dB
    std::mt19937_64 rng(20260822);
    std::normal_distribution<double> gauss(0.0, std::sqrt(noise_var / 2.0));

    for (int repeats : {1, 4, 8}) {
        double snr_out_sum = 0.0, snr_in_sum = 0.0;
        const int trials = 6;
        for (int t = 0; t < trials; ++t) {
            double sig_pow = 0.0, noise_pow = 0.0;
            std::vector<std::complex<double>> folded(L, 0.0);
            for (int r = 0; r < repeats; ++r) {
                for (std::size_t i = 0; i < L; ++i) {
                    std::complex<double> n(gauss(rng), gauss(rng));
                    std::complex<double> s = clean[r * L + i];
                    sig_pow += std::norm(s);
                    noise_pow += std::norm(n);
                    folded[i] += (s + n) / double(repeats);
                }
            }
            auto corr = naive_corr(folded, frame.chips);
            double peak = std::norm(corr[0]);
            double off = 0.0;
            for (std::size_t lag = 1; lag < L; ++lag)
                off += std::norm(corr[lag]);
            off /= double(L - 1);
            snr_out_sum += peak / off;
            snr_in_sum += sig_pow / noise_pow;
        }
        double gain_db = 10.0 * std::log10(snr_out_sum / snr_in_sum);
        CAPTURE(repeats);
        CHECK(std::abs(gain_db - 10.0 * std::log10(double(L) * repeats)) < 0.5);
    }
}
