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

#include "skysounder/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace skysounder {

namespace {

constexpr double k_pi = 3.14159265358979323846;
constexpr double k_deg = k_pi / 180.0;

// WGS-84 ellipsoid.
constexpr double k_wgs_a = 6378137.0;
constexpr double k_wgs_f = 1.0 / 298.257223563;
constexpr double k_wgs_e2 = k_wgs_f * (2.0 - k_wgs_f);
const double k_wgs_b = k_wgs_a * (1.0 - k_wgs_f);

void validate_fix(const GeoFix& fix) {
    if (!(std::abs(fix.lat_deg) <= 90.0))
        throw std::invalid_argument("geo fix: latitude outside [-90, 90]");
    if (!(std::abs(fix.lon_deg) <= 180.0))
        throw std::invalid_argument("geo fix: longitude outside [-180, 180]");
    if (!std::isfinite(fix.alt_m))
        throw std::invalid_argument("geo fix: altitude not finite");
}

struct EnuBasis {
    std::array<double, 3> east, north, up;
};

EnuBasis enu_basis(double lat_deg, double lon_deg) {
    const double sf = std::sin(lat_deg * k_deg), cf = std::cos(lat_deg * k_deg);
    const double sl = std::sin(lon_deg * k_deg), cl = std::cos(lon_deg * k_deg);
    EnuBasis b;
    b.east = {-sl, cl, 0.0};
    b.north = {-sf * cl, -sf * sl, cf};
    b.up = {cf * cl, cf * sl, sf};
    return b;
}

double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

// Pointing angles of the ECEF difference vector seen from `at`.
void pointing(const GeoFix& at, const std::array<double, 3>& diff,
              double dist, double& az_deg, double& el_deg) {
    const EnuBasis basis = enu_basis(at.lat_deg, at.lon_deg);
    const double e = dot3(basis.east, diff);
    const double n = dot3(basis.north, diff);
    const double u = dot3(basis.up, diff);
    az_deg = std::atan2(e, n) / k_deg;
    if (az_deg < 0.0)
        az_deg += 360.0;
    if (az_deg >= 360.0)
        az_deg -= 360.0;
    el_deg = std::asin(std::clamp(u / dist, -1.0, 1.0)) / k_deg;
}

}  // namespace

std::array<double, 3> ecef_from_geodetic(const GeoFix& fix) {
    validate_fix(fix);
    const double sf = std::sin(fix.lat_deg * k_deg);
    const double cf = std::cos(fix.lat_deg * k_deg);
    const double sl = std::sin(fix.lon_deg * k_deg);
    const double cl = std::cos(fix.lon_deg * k_deg);
    const double n = k_wgs_a / std::sqrt(1.0 - k_wgs_e2 * sf * sf);
    return {(n + fix.alt_m) * cf * cl, (n + fix.alt_m) * cf * sl,
            (n * (1.0 - k_wgs_e2) + fix.alt_m) * sf};
}

GeoFix geodetic_from_ecef(const std::array<double, 3>& ecef,
                          std::int64_t time_ns) {
    const double x = ecef[0], y = ecef[1], z = ecef[2];
    const double p = std::hypot(x, y);

    // Bowring's starting latitude, then fixed-point refinement.
    const double ep2 = (k_wgs_a * k_wgs_a - k_wgs_b * k_wgs_b) / (k_wgs_b * k_wgs_b);
    const double psi = std::atan2(z * k_wgs_a, p * k_wgs_b);
    double lat = std::atan2(z + ep2 * k_wgs_b * std::pow(std::sin(psi), 3),
                            p - k_wgs_e2 * k_wgs_a * std::pow(std::cos(psi), 3));
    double h = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double sf = std::sin(lat);
        const double n = k_wgs_a / std::sqrt(1.0 - k_wgs_e2 * sf * sf);
        // Stable at every latitude, poles included.
        h = p * std::cos(lat) + z * sf - k_wgs_a * std::sqrt(1.0 - k_wgs_e2 * sf * sf);
        lat = std::atan2(z, p * (1.0 - k_wgs_e2 * n / (n + h)));
    }

    GeoFix fix;
    fix.time_ns = time_ns;
    fix.lat_deg = lat / k_deg;
    fix.lon_deg = std::atan2(y, x) / k_deg;
    fix.alt_m = h;
    return fix;
}

LinkGeometry link_geometry(const GeoFix& tx, const GeoFix& rx) {
    if (std::abs(tx.time_ns - rx.time_ns) > 1000000000LL)
        throw std::invalid_argument(
            "link geometry: fixes more than one second apart");
    const auto pt = ecef_from_geodetic(tx);
    const auto pr = ecef_from_geodetic(rx);
    const std::array<double, 3> d_tr = {pr[0] - pt[0], pr[1] - pt[1],
                                        pr[2] - pt[2]};

    LinkGeometry geom;
    geom.time_ns = tx.time_ns;
    geom.tx_alt_m = tx.alt_m;
    geom.rx_alt_m = rx.alt_m;
    geom.distance_m = std::sqrt(dot3(d_tr, d_tr));
    if (geom.distance_m == 0.0) {
        geom.degenerate = true;
        return geom;
    }
    pointing(tx, d_tr, geom.distance_m, geom.az_tx_to_rx_deg,
             geom.el_tx_to_rx_deg);
    const std::array<double, 3> d_rt = {-d_tr[0], -d_tr[1], -d_tr[2]};
    pointing(rx, d_rt, geom.distance_m, geom.az_rx_to_tx_deg,
             geom.el_rx_to_tx_deg);
    return geom;
}

GeoFix interpolate_track(const std::vector<GeoFix>& log, std::int64_t t_ns) {
    if (log.empty())
        throw std::invalid_argument("track interpolation: empty log");
    if (t_ns < log.front().time_ns || t_ns > log.back().time_ns)
        throw std::invalid_argument(
            "track interpolation: time " + std::to_string(t_ns) +
            " ns outside the log span");

    const auto it = std::lower_bound(
        log.begin(), log.end(), t_ns,
        [](const GeoFix& f, std::int64_t t) { return f.time_ns < t; });
    if (it->time_ns == t_ns)
        return *it;

    const GeoFix& lo = *(it - 1);
    const GeoFix& hi = *it;
    const double w =
        double(t_ns - lo.time_ns) / double(hi.time_ns - lo.time_ns);
    const auto a = ecef_from_geodetic(lo);
    const auto b = ecef_from_geodetic(hi);
    const std::array<double, 3> p = {a[0] + w * (b[0] - a[0]),
                                     a[1] + w * (b[1] - a[1]),
                                     a[2] + w * (b[2] - a[2])};
    return geodetic_from_ecef(p, t_ns);
}

AntennaPattern::AntennaPattern(double az_step_deg, double el_step_deg,
                               std::vector<double> gain_dbi)
    : az_step_deg_(az_step_deg), el_step_deg_(el_step_deg),
      gain_(std::move(gain_dbi)) {
    if (!(az_step_deg_ > 0.0) || !(el_step_deg_ > 0.0))
        throw std::invalid_argument("antenna pattern: steps must be positive");
    const double na = 360.0 / az_step_deg_;
    const double ne = 180.0 / el_step_deg_;
    if (std::abs(na - std::round(na)) > 1e-9 ||
        std::abs(ne - std::round(ne)) > 1e-9)
        throw std::invalid_argument(
            "antenna pattern: steps must divide 360 and 180 evenly");
    n_az_ = static_cast<std::size_t>(std::llround(na));
    n_el_ = static_cast<std::size_t>(std::llround(ne)) + 1;
    if (gain_.size() != n_az_ * n_el_)
        throw std::invalid_argument(
            "antenna pattern: expected " + std::to_string(n_az_ * n_el_) +
            " grid values, got " + std::to_string(gain_.size()));
    for (double g : gain_)
        if (!std::isfinite(g))
            throw std::invalid_argument("antenna pattern: non-finite gain");
}

AntennaPattern AntennaPattern::isotropic(double gain_dbi) {
    return AntennaPattern(90.0, 90.0, std::vector<double>(4 * 3, gain_dbi));
}

double AntennaPattern::gain_dbi(double az_deg, double el_deg) const {
    double az = std::fmod(az_deg, 360.0);
    if (az < 0.0)
        az += 360.0;
    const double el = std::clamp(el_deg, -90.0, 90.0);

    const double fa = az / az_step_deg_;
    std::size_t ia = static_cast<std::size_t>(fa);
    if (ia >= n_az_)
        ia = n_az_ - 1;
    const double wa = fa - double(ia);
    const std::size_t ia2 = (ia + 1) % n_az_;

    const double fe = (el + 90.0) / el_step_deg_;
    std::size_t ie = static_cast<std::size_t>(fe);
    if (ie >= n_el_ - 1)
        ie = n_el_ - 2;
    const double we = fe - double(ie);

    const double g00 = gain_[ie * n_az_ + ia];
    const double g01 = gain_[ie * n_az_ + ia2];
    const double g10 = gain_[(ie + 1) * n_az_ + ia];
    const double g11 = gain_[(ie + 1) * n_az_ + ia2];
    return (1.0 - we) * ((1.0 - wa) * g00 + wa * g01) +
           we * ((1.0 - wa) * g10 + wa * g11);
}

double antenna_correction_db(const LinkGeometry& geom,
                             const AntennaPattern& tx_pattern,
                             const AntennaPattern& rx_pattern) {
    return tx_pattern.gain_dbi(geom.az_tx_to_rx_deg, geom.el_tx_to_rx_deg) +
           rx_pattern.gain_dbi(geom.az_rx_to_tx_deg, geom.el_rx_to_tx_deg);
}

std::vector<GeoFix> read_flight_log(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open flight log: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "time_ns,lat_deg,lon_deg,alt_m")
        throw std::runtime_error("flight log " + path +
                                 ": bad or missing header");
    std::vector<GeoFix> fixes;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty())
            continue;
        std::istringstream ss(line);
        GeoFix fix;
        char c1 = 0, c2 = 0, c3 = 0;
        if (!(ss >> fix.time_ns >> c1 >> fix.lat_deg >> c2 >> fix.lon_deg >>
              c3 >> fix.alt_m) ||
            c1 != ',' || c2 != ',' || c3 != ',')
            throw std::runtime_error("flight log " + path + ": bad row " +
                                     std::to_string(row));
        validate_fix(fix);
        if (!fixes.empty() && fix.time_ns <= fixes.back().time_ns)
            throw std::runtime_error("flight log " + path +
                                     ": time not increasing at row " +
                                     std::to_string(row));
        fixes.push_back(fix);
    }
    return fixes;
}

void write_flight_log(const std::string& path,
                      const std::vector<GeoFix>& fixes) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write flight log: " + path);
    out << "time_ns,lat_deg,lon_deg,alt_m\n";
    out << std::fixed;
    for (const auto& fix : fixes)
        out << fix.time_ns << ',' << std::setprecision(12) << fix.lat_deg
            << ',' << fix.lon_deg << ',' << std::setprecision(6) << fix.alt_m
            << '\n';
    if (!out)
        throw std::runtime_error("write failed on flight log: " + path);
}

AntennaPattern read_pattern_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open antenna pattern: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "az_deg,el_deg,gain_dbi")
        throw std::runtime_error("antenna pattern " + path +
                                 ": bad or missing header");

    std::vector<double> az, el, gain;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty())
            continue;
        std::istringstream ss(line);
        double a = 0.0, e = 0.0, g = 0.0;
        char c1 = 0, c2 = 0;
        if (!(ss >> a >> c1 >> e >> c2 >> g) || c1 != ',' || c2 != ',')
            throw std::runtime_error("antenna pattern " + path + ": bad row " +
                                     std::to_string(row));
        az.push_back(a);
        el.push_back(e);
        gain.push_back(g);
    }
    if (gain.empty())
        throw std::runtime_error("antenna pattern " + path + ": no grid rows");

    // Row-major in elevation: one full azimuth sweep per elevation node.
    std::size_t n_az = 0;
    while (n_az < el.size() && el[n_az] == el[0])
        ++n_az;
    if (n_az == 0 || gain.size() % n_az != 0)
        throw std::runtime_error("antenna pattern " + path +
                                 ": grid is not a full az/el product");
    const std::size_t n_el = gain.size() / n_az;
    if (n_el < 2)
        throw std::runtime_error("antenna pattern " + path +
                                 ": need at least two elevation rows");
    const double az_step = 360.0 / double(n_az);
    const double el_step = 180.0 / double(n_el - 1);
    for (std::size_t i = 0; i < gain.size(); ++i) {
        const std::size_t ia = i % n_az;
        const std::size_t ie = i / n_az;
        if (std::abs(az[i] - double(ia) * az_step) > 1e-6 ||
            std::abs(el[i] - (-90.0 + double(ie) * el_step)) > 1e-6)
            throw std::runtime_error(
                "antenna pattern " + path + ": row " + std::to_string(i + 2) +
                " off the regular grid");
    }
    return AntennaPattern(az_step, el_step, std::move(gain));
}

}  // namespace skysounder
