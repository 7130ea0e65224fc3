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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "skysounder/common.hpp"

namespace skysounder {

// One timestamped GPS fix. Altitude is meters above the WGS-84 ellipsoid.
struct GeoFix {
    std::int64_t time_ns = 0;
    double lat_deg = 0.0;
    double lon_deg = 0.0;
    double alt_m = 0.0;
};

// Instantaneous geometry of one radio link. Azimuths are degrees clockwise
// from north in [0, 360), elevations degrees above the local horizon in
// [-90, 90], each in that endpoint's East-North-Up frame. Endpoint
// altitudes are carried along so channel synthesis can place a ground
// reflection without going back to the fixes.
struct LinkGeometry {
    double distance_m = 0.0;
    double az_tx_to_rx_deg = 0.0;
    double el_tx_to_rx_deg = 0.0;
    double az_rx_to_tx_deg = 0.0;
    double el_rx_to_tx_deg = 0.0;
    std::int64_t time_ns = 0;
    double tx_alt_m = 0.0;
    double rx_alt_m = 0.0;
    // Set when the endpoints coincide and the azimuths are meaningless.
    bool degenerate = false;
};

// Regular az/el gain grid in dBi with bilinear interpolation. Azimuth
// wraps modulo 360, elevation clamps at the poles.
class AntennaPattern {
  public:
    // Uniform grid: az nodes start at 0 deg with `az_step_deg` spacing
    // (the 360 -> 0 wrap segment is implied), el nodes span
    // [-90, +90] inclusive with `el_step_deg` spacing. `gain_dbi` is
    // row-major in elevation: index = el_index * n_az + az_index.
    AntennaPattern(double az_step_deg, double el_step_deg,
                   std::vector<double> gain_dbi);

    static AntennaPattern isotropic(double gain_dbi = 0.0);

    double gain_dbi(double az_deg, double el_deg) const;

    std::size_t az_count() const { return n_az_; }
    std::size_t el_count() const { return n_el_; }

  private:
    double az_step_deg_;
    double el_step_deg_;
    std::size_t n_az_;
    std::size_t n_el_;
    std::vector<double> gain_;
};

// WGS-84 geodetic to Earth-centered Earth-fixed, meters.
std::array<double, 3> ecef_from_geodetic(const GeoFix& fix);

// Inverse transform; iterative in latitude, converges to well under 1 mm.
// The result keeps `time_ns` from the argument.
GeoFix geodetic_from_ecef(const std::array<double, 3>& ecef,
                          std::int64_t time_ns = 0);

// Distance plus both-way pointing angles for a TX/RX fix pair. Identical
// positions yield distance 0 with the degenerate flag set.
LinkGeometry link_geometry(const GeoFix& tx, const GeoFix& rx);

// Piecewise-linear interpolation along a fix log, performed in ECEF.
// Throws std::invalid_argument when t lies outside the log's time span
// or the log is empty.
GeoFix interpolate_track(const std::vector<GeoFix>& log, std::int64_t t_ns);

// Combined pattern gain of both ends along the link, dB. The processing
// chain subtracts this from received power so reported path loss refers
// to isotropic antennas.
double antenna_correction_db(const LinkGeometry& geom,
                             const AntennaPattern& tx_pattern,
                             const AntennaPattern& rx_pattern);

// Flight-log CSV: header `time_ns,lat_deg,lon_deg,alt_m`, one row per fix,
// strictly increasing time.
std::vector<GeoFix> read_flight_log(const std::string& path);
void write_flight_log(const std::string& path,
                      const std::vector<GeoFix>& fixes);

// Antenna-pattern CSV: header `az_deg,el_deg,gain_dbi`, regular grid,
// row-major in elevation (all azimuths of one elevation before the next).
AntennaPattern read_pattern_csv(const std::string& path);

}  // namespace skysounder
