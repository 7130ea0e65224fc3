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

#include "skysounder/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "skysounder/common.hpp"

namespace skysounder::metrics {

namespace {

void require_taps(const CirEstimate& cir, const char* op) {
    if (cir.no_signal || cir.taps.empty())
        throw std::invalid_argument(std::string(op) +
                                    ": estimate has no taps");
}

// First and second power-weighted moments of the tap delays.
void delay_moments(const CirEstimate& cir, double& mean_s, double& m2_s2) {
    double wsum = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
    for (const auto& tap : cir.taps) {
        const double w = std::norm(tap.gain);
        wsum += w;
        t1 += w * tap.delay_s;
        t2 += w * tap.delay_s * tap.delay_s;
    }
    if (wsum <= 0.0)
        throw std::invalid_argument("delay spread: zero total tap power");
    mean_s = t1 / wsum;
    m2_s2 = t2 / wsum;
}

}  // namespace

DelaySpreadResult rms_delay_spread(const CirEstimate& cir,
                                   double distance_m) {
    require_taps(cir, "rms_delay_spread");
    double mean = 0.0;
    double m2 = 0.0;
    delay_moments(cir, mean, m2);
    // Central moment; clamp tiny negative rounding residue.
    const double var = std::max(0.0, m2 - mean * mean);

    DelaySpreadResult out;
    out.sigma_tau_s = std::sqrt(var);
    out.mean_excess_delay_s = mean;
    out.coherence_bw_hz = coherence_bandwidth(out.sigma_tau_s);
    out.time_ns = cir.time_ns;
    out.distance_m = distance_m;
    return out;
}

double mean_excess_delay(const CirEstimate& cir) {
    require_taps(cir, "mean_excess_delay");
    double mean = 0.0;
    double m2 = 0.0;
    delay_moments(cir, mean, m2);
    return mean;
}

std::optional<double> coherence_bandwidth(double sigma_tau_s) {
    if (!(sigma_tau_s >= 0.0))
        throw std::invalid_argument(
            "coherence_bandwidth: spread must be nonnegative");
    if (sigma_tau_s == 0.0)
        return std::nullopt;
    return 1.0 / sigma_tau_s;
}

PathLossSample path_loss_from_cir(const CirEstimate& cir, double tx_power_dbm,
                                  double correction_db, double distance_m) {
    require_taps(cir, "path_loss_from_cir");
    if (cir.dpc_index >= cir.taps.size() ||
        !cir.taps[cir.dpc_index].abs_gain_db)
        throw std::invalid_argument(
            "path_loss_from_cir: estimate lacks absolute calibration");

    double rx_mw = 0.0;
    for (const auto& tap : cir.taps)
        rx_mw += std::norm(tap.gain);
    if (rx_mw <= 0.0)
        throw std::invalid_argument("path_loss_from_cir: zero received power");

    PathLossSample out;
    out.distance_m = distance_m;
    out.pl_db = tx_power_dbm + correction_db - db_from_power(rx_mw);
    out.time_ns = cir.time_ns;
    return out;
}

PathLossFit fit_path_loss(const std::vector<PathLossSample>& samples,
                          double d0_m) {
    if (!(d0_m > 0.0))
        throw std::invalid_argument(
            "fit_path_loss: reference distance must be positive");
    if (samples.size() < 2)
        throw std::invalid_argument("fit_path_loss: need at least 2 samples");

    const std::size_t n = samples.size();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = samples[i];
        if (!(s.distance_m >= d0_m))
            throw std::invalid_argument(
                "fit_path_loss: distance below the reference distance");
        if (!std::isfinite(s.pl_db))
            throw std::invalid_argument("fit_path_loss: nonfinite path loss");
        x[i] = 10.0 * std::log10(s.distance_m / d0_m);
    }

    double xbar = 0.0;
    double ybar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xbar += x[i];
        ybar += samples[i].pl_db;
    }
    xbar /= double(n);
    ybar /= double(n);

    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - xbar;
        sxx += dx * dx;
        sxy += dx * (samples[i].pl_db - ybar);
    }
    if (sxx <= 0.0)
        throw std::invalid_argument(
            "fit_path_loss: need at least 2 distinct distances");

    PathLossFit fit;
    fit.eta = sxy / sxx;
    fit.pl0_db = ybar - fit.eta * xbar;
    fit.d0_m = d0_m;
    fit.count = n;

    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = samples[i].pl_db - (fit.pl0_db + fit.eta * x[i]);
        ssr += r * r;
    }
    fit.sigma_zeta_db = std::sqrt(ssr / double(n));
    return fit;
}

CampaignStats campaign_stats(const std::vector<DelaySpreadResult>& results) {
    if (results.empty())
        throw std::invalid_argument("campaign_stats: empty input");

    std::vector<double> v(results.size());
    for (std::size_t i = 0; i < results.size(); ++i)
        v[i] = results[i].sigma_tau_s;
    std::sort(v.begin(), v.end());

    CampaignStats st;
    st.min_s = v.front();
    st.max_s = v.back();
    const std::size_t n = v.size();
    st.median_s = (n % 2 == 1) ? v[n / 2]
                               : 0.5 * (v[n / 2 - 1] + v[n / 2]);

    double mean = 0.0;
    for (const double s : v)
        mean += s;
    mean /= double(n);
    double var = 0.0;
    for (const double s : v)
        var += (s - mean) * (s - mean);
    st.mean_s = mean;
    st.std_s = std::sqrt(var / double(n));
    return st;
}

}  // namespace skysounder::metrics
