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
#include <optional>
#include <vector>

#include "skysounder/sounder.hpp"

namespace skysounder::metrics {

// Delay dispersion summary of one channel impulse response estimate.
// Delays are referenced to the direct path component.
struct DelaySpreadResult {
    double sigma_tau_s = 0.0;
    double mean_excess_delay_s = 0.0;
    // Reciprocal of sigma_tau; absent when the spread is zero.
    std::optional<double> coherence_bw_hz;
    std::int64_t time_ns = 0;
    double distance_m = 0.0;
};

// One large-scale path loss observation at a known link distance.
struct PathLossSample {
    double distance_m = 0.0;
    double pl_db = 0.0;
    std::int64_t time_ns = 0;
};

// Log-distance model PL(d) = pl0_db + 10 * eta * log10(d / d0_m) fitted by
// ordinary least squares in the dB domain. sigma_zeta_db is the population
// standard deviation of the fit residuals (shadowing term).
struct PathLossFit {
    double eta = 0.0;
    double pl0_db = 0.0;
    double d0_m = 1.0;
    double sigma_zeta_db = 0.0;
    std::size_t count = 0;
};

// Descriptive statistics of the RMS delay spread over a campaign.
// Standard deviation uses the population convention (divide by N).
struct CampaignStats {
    double mean_s = 0.0;
    double std_s = 0.0;
    double median_s = 0.0;
    double min_s = 0.0;
    double max_s = 0.0;
};

// RMS delay spread: square root of the second central moment of the power
// delay profile, with power weights |gain|^2 over the retained taps.
// A single-tap estimate has zero spread. Throws std::invalid_argument on a
// no-signal or tapless estimate. time_ns is copied from the estimate;
// distance_m is caller context.
DelaySpreadResult rms_delay_spread(const CirEstimate& cir,
                                   double distance_m = 0.0);

// Power-weighted mean of the tap delays, in seconds relative to the direct
// path. Throws std::invalid_argument on a no-signal or tapless estimate.
double mean_excess_delay(const CirEstimate& cir);

// Reciprocal of the RMS delay spread. Zero spread means unbounded coherence
// bandwidth, reported as absent. Negative input is rejected.
std::optional<double> coherence_bandwidth(double sigma_tau_s);

// Large-scale path loss of one snapshot from the link budget:
//   pl = tx_power_dbm + correction_db - 10*log10(sum of retained tap powers).
// Requires an estimate with absolute calibration (abs_gain_db present on the
// direct path component); throws std::invalid_argument otherwise.
PathLossSample path_loss_from_cir(const CirEstimate& cir, double tx_power_dbm,
                                  double correction_db,
                                  double distance_m = 0.0);

// Ordinary least squares fit of pl_db against 10*log10(distance / d0_m).
// Requires at least two samples with distinct distances; throws
// std::invalid_argument otherwise, and on nonpositive or sub-reference
// distances or nonfinite losses.
PathLossFit fit_path_loss(const std::vector<PathLossSample>& samples,
                          double d0_m = 1.0);

// Mean, population standard deviation, median, minimum and maximum of the
// RMS delay spreads. Throws std::invalid_argument on an empty input.
CampaignStats campaign_stats(const std::vector<DelaySpreadResult>& results);

}  // namespace skysounder::metrics
