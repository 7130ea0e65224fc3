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
#include <fstream>
#include <random>
#include <vector>

#include "skysounder/geometry.hpp"
#include "test_util.hpp"

using namespace skysounder;

namespace {

GeoFix fix_at(double lat, double lon, double alt, std::int64_t t = 0) {
    GeoFix f;
    f.time_ns = t;
    f.lat_deg = lat;
    f.lon_deg = lon;
    f.alt_m = alt;
    return f;
}

// East unit vector of the local tangent frame, assembled independently of
// the library's basis code.
std::array<double, 3> east_at(double lon_deg) {
    const double d = 3.14159265358979323846 / 180.0;
    return {-std::sin(lon_deg * d), std::cos(lon_deg * d), 0.0};
}

GeoFix offset_east(const GeoFix& base, double meters) {
    auto p = ecef_from_geodetic(base);
    auto e = east_at(base.lon_deg);
    for (int i = 0; i < 3; ++i)
        p[i] += meters * e[i];
    return geodetic_from_ecef(p, base.time_ns);
}

}  // namespace

TEST_CASE("geodetic to ECEF: ellipsoid anchor points") {
    auto equator = ecef_from_geodetic(fix_at(0.0, 0.0, 0.0));
    CHECK(equator[0] == doctest::Approx(6378137.0).epsilon(1e-12));
    CHECK(std::abs(equator[1]) < 1e-6);
    CHECK(std::abs(equator[2]) < 1e-6);

    auto pole = ecef_from_geodetic(fix_at(90.0, 0.0, 0.0));
    CHECK(std::abs(pole[2] - 6356752.3142) < 0.01);
    CHECK(std::abs(pole[0]) < 1e-6);

    auto lifted = ecef_from_geodetic(fix_at(0.0, 0.0, 100.0));
    CHECK(lifted[0] - equator[0] == 100.0);

    CHECK_THROWS_AS(ecef_from_geodetic(fix_at(91.0, 0.0, 0.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(ecef_from_geodetic(fix_at(0.0, 181.0, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("geodetic <-> ECEF round trip stays under a millimeter") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> ulat(-89.0, 89.0);
    std::uniform_real_distribution<double> ulon(-180.0, 180.0);
    std::uniform_real_distribution<double> ualt(-100.0, 10000.0);
    for (int i = 0; i < 200; ++i) {
        GeoFix f = fix_at(ulat(rng), ulon(rng), ualt(rng));
        GeoFix b = geodetic_from_ecef(ecef_from_geodetic(f));
        CHECK(std::abs(b.lat_deg - f.lat_deg) < 1e-9);
        CHECK(std::abs(b.lon_deg - f.lon_deg) < 1e-9);
        CHECK(std::abs(b.alt_m - f.alt_m) < 1e-3);
    }
    // Longitude is arbitrary at the poles; latitude and height still hold.
    for (double lat : {90.0, -90.0}) {
        GeoFix f = fix_at(lat, 0.0, 123.0);
        GeoFix b = geodetic_from_ecef(ecef_from_geodetic(f));
        CHECK(std::abs(b.lat_deg - f.lat_deg) < 1e-6);
        CHECK(std::abs(b.alt_m - f.alt_m) < 1e-3);
    }
}

TEST_CASE("link geometry: degenerate, eastward offset, slant descent") {
    GeoFix base = fix_at(40.0, 29.0, 100.0);

    auto same = link_geometry(base, base);
    CHECK(same.degenerate);
    CHECK(same.distance_m == 0.0);

    GeoFix east = offset_east(base, 100.0);
    auto lg = link_geometry(base, east);
    CHECK(!lg.degenerate);
    CHECK(std::abs(lg.distance_m - 100.0) < 0.01);
    CHECK(std::abs(lg.az_tx_to_rx_deg - 90.0) < 0.1);
    CHECK(std::abs(lg.el_tx_to_rx_deg) < 0.1);
    CHECK(std::abs(lg.az_rx_to_tx_deg - 270.0) < 0.1);

    // Drone at 100 m looking down at a mast 3 m high, 85 m east.
    GeoFix mast = offset_east(fix_at(40.0, 29.0, 3.0), 85.0);
    auto down = link_geometry(base, mast);
    const double want_el = std::atan2(-97.0, 85.0) / (3.14159265358979323846 / 180.0);
    CHECK(std::abs(down.el_tx_to_rx_deg - want_el) < 0.1);
    CHECK(std::abs(want_el - (-48.77)) < 0.01);
    CHECK(std::abs(down.distance_m - std::hypot(85.0, 97.0)) < 0.1);
    CHECK(std::abs(down.distance_m - 129.0) < 0.1);

    // Reciprocity over a short link.
    CHECK(std::abs(down.el_tx_to_rx_deg + down.el_rx_to_tx_deg) < 0.1);
    auto back = link_geometry(mast, base);
    CHECK(down.distance_m == back.distance_m);
    CHECK(down.tx_alt_m == 100.0);
    // A tangent-plane offset climbs off the ellipsoid by d^2 / (2R).
    CHECK(std::abs(down.rx_alt_m - 3.0) < 0.01);

    GeoFix late = base;
    late.time_ns = 2000000000LL;
    CHECK_THROWS_AS(link_geometry(base, late), std::invalid_argument);
}

TEST_CASE("track interpolation: knots, midpoints, constant speed") {
    GeoFix a = fix_at(40.0, 29.0, 100.0, 0);
    GeoFix b = offset_east(a, 6.0);
    b.time_ns = 2000000000LL;
    std::vector<GeoFix> log = {a, b};

    GeoFix at_knot = interpolate_track(log, 0);
    CHECK(at_knot.lat_deg == a.lat_deg);
    CHECK(at_knot.lon_deg == a.lon_deg);
    CHECK(at_knot.alt_m == a.alt_m);

    GeoFix mid = interpolate_track(log, 1000000000LL);
    auto d0 = link_geometry(fix_at(a.lat_deg, a.lon_deg, a.alt_m, mid.time_ns),
                            mid);
    CHECK(std::abs(d0.distance_m - 3.0) < 1e-3);

    // 3 m/s: one 100 ms snapshot period moves 0.3 m.
    GeoFix tick = interpolate_track(log, 100000000LL);
    auto d1 = link_geometry(
        fix_at(a.lat_deg, a.lon_deg, a.alt_m, tick.time_ns), tick);
    CHECK(std::abs(d1.distance_m - 0.3) < 1e-3);

    // Monotone displacement along a straight track.
    double prev = -1.0;
    for (int i = 0; i <= 20; ++i) {
        GeoFix s = interpolate_track(log, i * 100000000LL);
        auto d = link_geometry(fix_at(a.lat_deg, a.lon_deg, a.alt_m, s.time_ns),
                               s);
        CHECK(d.distance_m >= prev);
        prev = d.distance_m;
    }

    CHECK_THROWS_AS(interpolate_track(log, -1), std::invalid_argument);
    CHECK_THROWS_AS(interpolate_track(log, 2000000001LL), std::invalid_argument);
    CHECK_THROWS_AS(interpolate_track({}, 0), std::invalid_argument);
}

TEST_CASE("antenna patterns: isotropic, constant, bilinear interpolation") {
    GeoFix base = fix_at(40.0, 29.0, 100.0);
    auto lg = link_geometry(base, offset_east(fix_at(40.0, 29.0, 40.0), 70.0));

    auto iso = AntennaPattern::isotropic();
    CHECK(antenna_correction_db(lg, iso, iso) == 0.0);
    auto three = AntennaPattern::isotropic(3.0);
    CHECK(antenna_correction_db(lg, three, three) == 6.0);

    // Gain linear in elevation stays exact under bilinear interpolation.
    const double el_step = 30.0;
    std::vector<double> grid;
    for (int ie = 0; ie < 7; ++ie) {
        const double el = -90.0 + ie * el_step;
        for (int ia = 0; ia < 4; ++ia)
            grid.push_back(2.0 - std::abs(el) / 9.0);
    }
    AntennaPattern dipole(90.0, el_step, grid);
    CHECK(dipole.gain_dbi(123.0, 0.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(dipole.gain_dbi(0.0, 45.0) == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(dipole.gain_dbi(11.0, -27.0) == doctest::Approx(-1.0).epsilon(1e-12));

    // A matched-altitude link dips below el = 0 by the earth curvature
    // over 200 m, a millidegree here.
    auto level = link_geometry(base, offset_east(base, 200.0));
    CHECK(std::abs(antenna_correction_db(level, dipole, dipole) - 4.0) < 0.01);

    // Azimuth wrap: nodes at 270 and 0 bracket a 315 degree query.
    std::vector<double> wrap;
    for (int ie = 0; ie < 3; ++ie)
        for (int ia = 0; ia < 4; ++ia)
            wrap.push_back(double(ia));
    AntennaPattern spin(90.0, 90.0, wrap);
    CHECK(spin.gain_dbi(315.0, 0.0) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(spin.gain_dbi(-45.0, 0.0) == doctest::Approx(1.5).epsilon(1e-12));

    CHECK_THROWS_AS(AntennaPattern(90.0, 90.0, std::vector<double>(5, 0.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(AntennaPattern(70.0, 90.0, std::vector<double>(12, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("flight logs and pattern grids round-trip through CSV") {
    auto dir = testutil::temp_dir("geometry");

    std::vector<GeoFix> fixes;
    for (int i = 0; i < 5; ++i) {
        GeoFix f = offset_east(fix_at(40.0, 29.0, 100.0 + i), 3.0 * i);
        f.time_ns = i * 100000000LL;
        fixes.push_back(f);
    }
    const std::string log_path = (dir / "trk.csv").string();
    write_flight_log(log_path, fixes);
    auto got = read_flight_log(log_path);
    REQUIRE(got.size() == fixes.size());
    for (std::size_t i = 0; i < fixes.size(); ++i) {
        CHECK(got[i].time_ns == fixes[i].time_ns);
        CHECK(std::abs(got[i].lat_deg - fixes[i].lat_deg) < 1e-11);
        CHECK(std::abs(got[i].lon_deg - fixes[i].lon_deg) < 1e-11);
        CHECK(std::abs(got[i].alt_m - fixes[i].alt_m) < 1e-5);
    }

    const std::string pat_path = (dir / "pat.csv").string();
    {
        std::ofstream out(pat_path);
        out << "az_deg,el_deg,gain_dbi\n";
        for (int ie = 0; ie < 3; ++ie)
            for (int ia = 0; ia < 4; ++ia)
                out << ia * 90.0 << ',' << -90.0 + ie * 90.0 << ','
                    << 0.5 * ia + ie << '\n';
    }
    auto pat = read_pattern_csv(pat_path);
    CHECK(pat.az_count() == 4);
    CHECK(pat.el_count() == 3);
    CHECK(pat.gain_dbi(90.0, 0.0) == doctest::Approx(1.5).epsilon(1e-12));

    CHECK_THROWS_AS(read_flight_log((dir / "absent.csv").string()),
                    std::runtime_error);

    const std::string bad_path = (dir / "bad.csv").string();
    {
        std::ofstream out(bad_path);
        out << "time_ns,lat_deg,lon_deg,alt_m\n";
        out << "100,40.0,29.0,10.0\n";
        out << "50,40.0,29.0,10.0\n";
    }
    CHECK_THROWS_AS(read_flight_log(bad_path), std::runtime_error);
}
