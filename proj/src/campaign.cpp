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

#include "skysounder/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "skysounder/common.hpp"
#include "skysounder/iqfile.hpp"
#include "skysounder/sounder.hpp"

namespace skysounder::campaign {

namespace {

constexpr double k_pi = 3.14159265358979323846;

std::string rx_mode_name(RxMode mode) {
    return mode == RxMode::airborne_static ? "airborne-static" : "ground-mast";
}

RxMode rx_mode_from_name(const std::string& name) {
    if (name == "airborne-static")
        return RxMode::airborne_static;
    if (name == "ground-mast")
        return RxMode::ground_mast;
    throw std::invalid_argument("unknown rx mode: " + name);
}

std::string kind_name(PathLossKind kind) {
    switch (kind) {
        case PathLossKind::free_space: return "free-space";
        case PathLossKind::flat_earth_two_ray: return "two-ray";
        case PathLossKind::log_distance: return "log-distance";
    }
    throw std::invalid_argument("unknown channel kind");
}

PathLossKind kind_from_name(const std::string& name) {
    if (name == "free-space")
        return PathLossKind::free_space;
    if (name == "two-ray")
        return PathLossKind::flat_earth_two_ray;
    if (name == "log-distance")
        return PathLossKind::log_distance;
    throw std::invalid_argument("unknown channel kind: " + name);
}

// Point east_m meters east of `base` in its local tangent plane, re-pinned
// to the commanded altitude (a flight holds altitude, not the tangent).
GeoFix offset_east(const GeoFix& base, double east_m, double alt_m) {
    GeoFix at = base;
    at.alt_m = alt_m;
    auto ecef = ecef_from_geodetic(at);
    const double lam = base.lon_deg * k_pi / 180.0;
    ecef[0] += east_m * -std::sin(lam);
    ecef[1] += east_m * std::cos(lam);
    GeoFix out = geodetic_from_ecef(ecef, base.time_ns);
    out.alt_m = alt_m;
    return out;
}

double segment_length_m(const GeoFix& a, const GeoFix& b) {
    GeoFix ta = a;
    GeoFix tb = b;
    ta.time_ns = 0;
    tb.time_ns = 0;
    return link_geometry(ta, tb).distance_m;
}

// Waypoints stamped with the time the transmitter reaches each of them at
// constant speed; zero-length segments are collapsed.
std::vector<GeoFix> tx_knots(const CampaignScenario& sc) {
    std::vector<GeoFix> knots;
    double cum_m = 0.0;
    for (const auto& wp : sc.tx_waypoints) {
        if (!knots.empty()) {
            const double seg = segment_length_m(knots.back(), wp);
            if (seg <= 0.0)
                continue;
            cum_m += seg;
        }
        GeoFix k = wp;
        k.time_ns = std::llround(cum_m / sc.speed_mps * 1e9);
        knots.push_back(k);
    }
    return knots;
}

double trajectory_length_m(const CampaignScenario& sc) {
    double len = 0.0;
    for (std::size_t i = 1; i < sc.tx_waypoints.size(); ++i)
        len += segment_length_m(sc.tx_waypoints[i - 1], sc.tx_waypoints[i]);
    return len;
}

nlohmann::json fix_json(const GeoFix& fix) {
    return {{"time_ns", fix.time_ns},
            {"lat_deg", fix.lat_deg},
            {"lon_deg", fix.lon_deg},
            {"alt_m", fix.alt_m}};
}

GeoFix fix_from_json(const nlohmann::json& j) {
    GeoFix f;
    f.time_ns = j.value("time_ns", std::int64_t{0});
    f.lat_deg = j.at("lat_deg").get<double>();
    f.lon_deg = j.at("lon_deg").get<double>();
    f.alt_m = j.at("alt_m").get<double>();
    return f;
}

void require_file(const std::filesystem::path& p, const char* what) {
    if (!std::filesystem::exists(p))
        throw std::runtime_error(std::string("missing ") + what + ": " +
                                 p.string());
}

// Result of processing one snapshot.
struct PerSnapshot {
    bool ok = false;
    bool no_signal = false;
    std::string error;
    SnapshotRow row;
    std::string cir_line;
    CirEstimate cir;
    std::optional<metrics::PathLossSample> pl;
    std::optional<metrics::DelaySpreadResult> spread;
};

PerSnapshot process_one(IQSnapshot snap, const waveform::SoundingFrame& frame,
                        const std::vector<GeoFix>& tx_track,
                        const std::vector<GeoFix>& rx_track,
                        const ProcessConfig& config) {
    PerSnapshot r;
    try {
        const GeoFix tx_fix = interpolate_track(tx_track, snap.time_ns);
        const GeoFix rx_fix = interpolate_track(rx_track, snap.time_ns);
        const LinkGeometry geom = link_geometry(tx_fix, rx_fix);
        double corr_db = config.antenna_correction_db;
        if (config.tx_pattern && config.rx_pattern)
            corr_db = antenna_correction_db(geom, *config.tx_pattern,
                                            *config.rx_pattern);

        auto pre = preprocess(snap, frame);
        if (!pre) {
            r.no_signal = true;
            return r;
        }
        const std::size_t periods =
            pre->samples.size() / frame.period_samples();
        if (config.cfo_align && periods >= 2) {
            const auto cfo = estimate_cfo(*pre, frame);
            if (!cfo) {
                r.no_signal = true;
                return r;
            }
            *pre = derotate(*pre, *cfo);
        }
        const unsigned reps =
            unsigned(std::min<std::size_t>(std::size_t(frame.repeats),
                                           periods));
        const auto profile = correlate(*pre, frame, reps);

        CirExtractConfig ec;
        ec.threshold_db = config.threshold_db;
        ec.noise_guard_db = config.noise_guard_db;
        ec.antenna_correction_db = corr_db;
        ec.tx_power_dbm = config.tx_power_dbm;
        r.cir = extract_cir(profile, ec);
        if (r.cir.no_signal) {
            r.no_signal = true;
            return r;
        }

        const double dist = geom.distance_m;
        r.spread = metrics::rms_delay_spread(r.cir, dist);
        r.row.time_ns = snap.time_ns;
        r.row.distance_m = dist;
        r.row.sigma_tau_ns = r.spread->sigma_tau_s * 1e9;
        r.row.med_ns = r.spread->mean_excess_delay_s * 1e9;
        r.row.num_taps = r.cir.taps.size();
        if (config.tx_power_dbm) {
            r.pl = metrics::path_loss_from_cir(r.cir, *config.tx_power_dbm,
                                               corr_db, dist);
            r.row.pl_db = r.pl->pl_db;
        }
        r.cir_line = cir_json(r.cir, dist);
        r.ok = true;
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    return r;
}

// Runs the pipeline over every snapshot in parallel batches, keeping
// results in snapshot order.
std::vector<PerSnapshot> run_pipeline(iqfile::IQReader& reader,
                                      const waveform::SoundingFrame& frame,
                                      const std::vector<GeoFix>& tx_track,
                                      const std::vector<GeoFix>& rx_track,
                                      const ProcessConfig& config) {
    const std::size_t n = reader.snapshot_count();
    std::size_t workers = config.workers > 0
                              ? std::size_t(config.workers)
                              : std::max(1u, std::thread::hardware_concurrency());
    workers = std::max<std::size_t>(1, workers);

    std::vector<PerSnapshot> results;
    results.reserve(n);
    for (std::size_t start = 0; start < n; start += workers) {
        const std::size_t count = std::min(workers, n - start);
        std::vector<IQSnapshot> snaps;
        snaps.reserve(count);
        for (std::size_t j = 0; j < count; ++j)
            snaps.push_back(reader.read(start + j));
        if (count == 1 || workers == 1) {
            for (auto& s : snaps)
                results.push_back(process_one(std::move(s), frame, tx_track,
                                              rx_track, config));
        } else {
            std::vector<std::future<PerSnapshot>> futs;
            futs.reserve(count);
            for (auto& s : snaps)
                futs.push_back(std::async(std::launch::async, process_one,
                                          std::move(s), std::cref(frame),
                                          std::cref(tx_track),
                                          std::cref(rx_track),
                                          std::cref(config)));
            for (auto& f : futs)
                results.push_back(f.get());
        }
    }
    return results;
}

std::string format_double(double v, int precision) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

// Ground-truth taps quantized to the sample grid, merged per bin, then cut
// to the extractor's retention rule. Mirrors what the pipeline can see.
struct ExpectedTap {
    long long rel_bin = 0;
    double rel_power_db = 0.0;
};

struct ExpectedCir {
    std::vector<ExpectedTap> taps;
    double total_gain_mw = 0.0;  // linear |g|^2 over retained bins
    double sigma_tau_s = 0.0;
};

ExpectedCir expected_from_truth(const ChannelRealization& truth, double fs,
                                double threshold_db) {
    std::map<long long, cxd> bins;
    for (const auto& tap : truth.taps) {
        const long long bin = std::llround(tap.delay_s * fs);
        bins[bin] += std::polar(tap.amplitude, tap.phase_rad);
    }
    // A bin shadowed by a stronger immediate neighbor is not a local
    // maximum of the correlation profile and will not surface as a tap.
    std::map<long long, double> power;
    for (const auto& [bin, g] : bins)
        power[bin] = std::norm(g);
    std::map<long long, double> kept_power;
    for (const auto& [bin, p] : power) {
        const auto left = power.find(bin - 1);
        const auto right = power.find(bin + 1);
        if (left != power.end() && left->second >= p)
            continue;
        if (right != power.end() && right->second > p)
            continue;
        kept_power[bin] = p;
    }

    double pmax = 0.0;
    for (const auto& [bin, p] : kept_power)
        pmax = std::max(pmax, p);
    ExpectedCir out;
    if (pmax <= 0.0)
        return out;

    // Reference: earliest bin within 3 dB of the strongest. pmax > 0
    // guarantees the scan finds one.
    const double dpc_min = pmax / power_from_db(3.0);
    long long dpc_bin = 0;
    for (const auto& [bin, p] : kept_power) {
        if (p >= dpc_min) {
            dpc_bin = bin;
            break;
        }
    }
    const double p_dpc = kept_power[dpc_bin];
    const double keep_min = p_dpc / power_from_db(threshold_db);

    double wsum = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
    for (const auto& [bin, p] : kept_power) {
        if (p < keep_min)
            continue;
        ExpectedTap t;
        t.rel_bin = bin - dpc_bin;
        t.rel_power_db = db_from_power(p / p_dpc);
        out.taps.push_back(t);
        out.total_gain_mw += p;
        const double tau = double(t.rel_bin) / fs;
        wsum += p;
        t1 += p * tau;
        t2 += p * tau * tau;
    }
    const double mean = t1 / wsum;
    out.sigma_tau_s = std::sqrt(std::max(0.0, t2 / wsum - mean * mean));
    return out;
}

}  // namespace

CampaignScenario build_scenario(const std::string& preset) {
    CampaignScenario sc;
    sc.name = preset;
    GeoFix base;
    base.lat_deg = 40.0;
    base.lon_deg = 29.0;
    base.alt_m = 0.0;

    double rx_alt = 0.0;
    double tx_alt = 100.0;
    if (preset == "a2a") {
        sc.rx_mode = RxMode::airborne_static;
        rx_alt = 100.0;
    } else if (preset == "a2g") {
        sc.rx_mode = RxMode::ground_mast;
        rx_alt = 3.0;
    } else {
        throw std::invalid_argument("unknown scenario preset: " + preset);
    }

    sc.rx_position = base;
    sc.rx_position.alt_m = sc.ground_alt_m + rx_alt;
    sc.tx_waypoints = {
        offset_east(base, 85.0, sc.ground_alt_m + tx_alt),
        offset_east(base, 1085.0, sc.ground_alt_m + tx_alt)};
    sc.speed_mps = 3.0;
    sc.snapshot_period_ms = 100.0;
    sc.sequence = waveform::default_spec(12);
    sc.repeats = 20;
    sc.samples_per_chip = 1;
    sc.chip_duration_s = 20e-9;
    sc.center_freq_hz = 3.5e9;
    sc.tx_power_dbm = 30.0;
    sc.channel_kind = PathLossKind::flat_earth_two_ray;
    return sc;
}

void validate_scenario(const CampaignScenario& sc) {
    if (sc.tx_waypoints.empty())
        throw std::invalid_argument("scenario: empty trajectory");
    if (!(sc.speed_mps > 0.0))
        throw std::invalid_argument("scenario: speed must be positive");
    if (!(sc.snapshot_period_ms > 0.0))
        throw std::invalid_argument("scenario: snapshot period must be positive");
    if (sc.repeats < 1 || sc.repeats > 20)
        throw std::invalid_argument("scenario: repeats must be in 1..20");
    if (sc.samples_per_chip < 1)
        throw std::invalid_argument("scenario: samples per chip must be >= 1");
    if (!(sc.chip_duration_s > 0.0))
        throw std::invalid_argument("scenario: chip duration must be positive");
    if (!(sc.center_freq_hz > 0.0))
        throw std::invalid_argument("scenario: carrier must be positive");
    if (!(sc.channel_d0_m > 0.0))
        throw std::invalid_argument("scenario: reference distance must be positive");
    if (!std::isfinite(sc.channel_eta) || !std::isfinite(sc.channel_pl0_db))
        throw std::invalid_argument("scenario: nonfinite channel parameters");
}

std::size_t snapshot_count(const CampaignScenario& sc) {
    validate_scenario(sc);
    const double duration_s = trajectory_length_m(sc) / sc.speed_mps;
    const double period_s = sc.snapshot_period_ms / 1e3;
    return std::size_t(std::floor(duration_s / period_s + 1e-9)) + 1;
}

PathLossModelParams channel_params(const CampaignScenario& sc) {
    PathLossModelParams params;
    params.kind = sc.channel_kind;
    params.wavelength_m = wavelength_m(sc.center_freq_hz);
    params.eta = sc.channel_eta;
    params.pl0_db = sc.channel_pl0_db;
    params.d0_m = sc.channel_d0_m;
    return params;
}

std::string scenario_json(const CampaignScenario& sc) {
    nlohmann::json j;
    j["name"] = sc.name;
    j["rx_mode"] = rx_mode_name(sc.rx_mode);
    j["rx_position"] = fix_json(sc.rx_position);
    j["tx_waypoints"] = nlohmann::json::array();
    for (const auto& wp : sc.tx_waypoints)
        j["tx_waypoints"].push_back(fix_json(wp));
    j["speed_mps"] = sc.speed_mps;
    j["snapshot_period_ms"] = sc.snapshot_period_ms;
    j["ground_alt_m"] = sc.ground_alt_m;
    j["waveform"] = {{"degree", sc.sequence.degree},
                     {"taps", sc.sequence.taps},
                     {"seed", sc.sequence.seed},
                     {"repeats", sc.repeats},
                     {"samples_per_chip", sc.samples_per_chip},
                     {"chip_duration_ns", sc.chip_duration_s * 1e9}};
    j["center_freq_hz"] = sc.center_freq_hz;
    j["tx_power_dbm"] = sc.tx_power_dbm;
    j["channel"] = {{"kind", kind_name(sc.channel_kind)},
                    {"eta", sc.channel_eta},
                    {"pl0_db", sc.channel_pl0_db},
                    {"d0_m", sc.channel_d0_m}};
    // JSON has no -inf; null stands for "noise disabled".
    j["impairments"] = {
        {"noise_density_dbm_hz",
         std::isfinite(sc.impairments.noise_density_dbm_hz)
             ? nlohmann::json(sc.impairments.noise_density_dbm_hz)
             : nlohmann::json(nullptr)},
        {"cfo_hz", sc.impairments.cfo_hz},
        {"timing_offset_samples", sc.impairments.timing_offset_samples}};
    j["seed"] = sc.seed;
    return j.dump(2);
}

CampaignScenario scenario_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed scenario JSON: ") +
                                    e.what());
    }
    CampaignScenario sc;
    try {
        sc.name = j.value("name", std::string("custom"));
        sc.rx_mode = rx_mode_from_name(
            j.value("rx_mode", std::string("airborne-static")));
        sc.rx_position = fix_from_json(j.at("rx_position"));
        sc.tx_waypoints.clear();
        for (const auto& wp : j.at("tx_waypoints"))
            sc.tx_waypoints.push_back(fix_from_json(wp));
        sc.speed_mps = j.value("speed_mps", 3.0);
        sc.snapshot_period_ms = j.value("snapshot_period_ms", 100.0);
        sc.ground_alt_m = j.value("ground_alt_m", 0.0);
        if (j.contains("waveform")) {
            const auto& w = j["waveform"];
            sc.sequence.degree = w.value("degree", 12u);
            if (w.contains("taps"))
                sc.sequence.taps = w["taps"].get<std::vector<unsigned>>();
            else
                sc.sequence.taps = waveform::default_taps(sc.sequence.degree);
            sc.sequence.seed = w.value("seed", 1u);
            sc.repeats = w.value("repeats", 20);
            sc.samples_per_chip = w.value("samples_per_chip", 1);
            sc.chip_duration_s = w.value("chip_duration_ns", 20.0) * 1e-9;
        }
        sc.center_freq_hz = j.value("center_freq_hz", 3.5e9);
        sc.tx_power_dbm = j.value("tx_power_dbm", 30.0);
        if (j.contains("channel")) {
            const auto& c = j["channel"];
            sc.channel_kind =
                kind_from_name(c.value("kind", std::string("two-ray")));
            sc.channel_eta = c.value("eta", 2.0);
            sc.channel_pl0_db = c.value("pl0_db", 0.0);
            sc.channel_d0_m = c.value("d0_m", 1.0);
        }
        if (j.contains("impairments")) {
            const auto& i = j["impairments"];
            if (i.contains("noise_density_dbm_hz") &&
                i["noise_density_dbm_hz"].is_null())
                sc.impairments.noise_density_dbm_hz =
                    -std::numeric_limits<double>::infinity();
            else
                sc.impairments.noise_density_dbm_hz =
                    i.value("noise_density_dbm_hz", -174.0);
            sc.impairments.cfo_hz = i.value("cfo_hz", 0.0);
            sc.impairments.timing_offset_samples =
                i.value("timing_offset_samples", std::int64_t{0});
        }
        sc.seed = j.value("seed", std::uint64_t{1});
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed scenario JSON: ") +
                                    e.what());
    }
    validate_scenario(sc);
    return sc;
}

MeasurementRecord record_in_dir(const std::filesystem::path& dir) {
    MeasurementRecord rec;
    rec.dir = dir;
    rec.iq_path = dir / "campaign.iq";
    rec.tx_log_path = dir / "tx_flight.csv";
    rec.rx_log_path = dir / "rx_flight.csv";
    require_file(rec.iq_path, "IQ capture");
    require_file(iqfile::sidecar_path(rec.iq_path), "IQ sidecar");
    require_file(rec.tx_log_path, "flight log");
    require_file(rec.rx_log_path, "flight log");
    const auto truth = dir / "truth.jsonl";
    if (std::filesystem::exists(truth))
        rec.truth_path = truth;
    const auto scen = dir / "scenario.json";
    if (std::filesystem::exists(scen))
        rec.scenario_path = scen;
    iqfile::IQReader reader(rec.iq_path);
    rec.snapshot_count = reader.snapshot_count();
    return rec;
}

MeasurementRecord simulate_campaign(const CampaignScenario& sc,
                                    const std::filesystem::path& out_dir,
                                    int decimate) {
    validate_scenario(sc);
    if (decimate < 1)
        throw std::invalid_argument("simulate: decimate must be >= 1");
    std::filesystem::create_directories(out_dir);

    const auto frame = waveform::build_frame(sc.sequence, sc.repeats,
                                             sc.samples_per_chip,
                                             sc.chip_duration_s);
    const double fs = frame.sample_rate_hz();

    iqfile::IQFileMeta meta;
    meta.sample_rate_hz = fs;
    meta.center_freq_hz = sc.center_freq_hz;
    meta.snapshot_len = frame.sample_count();
    meta.snapshot_period_ms = sc.snapshot_period_ms * decimate;
    meta.start_time_ns = 0;
    meta.sequence = sc.sequence;
    meta.repeats = sc.repeats;

    MeasurementRecord rec;
    rec.dir = out_dir;
    rec.iq_path = out_dir / "campaign.iq";
    rec.tx_log_path = out_dir / "tx_flight.csv";
    rec.rx_log_path = out_dir / "rx_flight.csv";
    rec.truth_path = out_dir / "truth.jsonl";
    rec.scenario_path = out_dir / "scenario.json";

    iqfile::IQWriter writer(rec.iq_path, meta);
    std::ofstream truth(rec.truth_path);
    if (!truth)
        throw std::runtime_error("cannot write ground truth: " +
                                 rec.truth_path.string());

    const auto knots = tx_knots(sc);
    const std::size_t n_full = snapshot_count(sc);
    const auto tx_block =
        waveform::frame_samples(frame, amplitude_from_db(sc.tx_power_dbm));
    const auto params = channel_params(sc);

    std::vector<GeoFix> tx_rows;
    std::vector<GeoFix> rx_rows;
    for (std::size_t k = 0; k < n_full; k += std::size_t(decimate)) {
        const std::int64_t t_ns =
            std::llround(double(k) * sc.snapshot_period_ms * 1e6);
        // The final snapshot can overshoot the trajectory end by rounding;
        // the transmitter holds position there.
        const std::int64_t t_pos =
            std::min<std::int64_t>(t_ns, knots.back().time_ns);
        GeoFix tx_fix = interpolate_track(knots, t_pos);
        tx_fix.time_ns = t_ns;
        GeoFix rx_fix = sc.rx_position;
        rx_fix.time_ns = t_ns;

        LinkGeometry geom = link_geometry(tx_fix, rx_fix);
        geom.tx_alt_m -= sc.ground_alt_m;
        geom.rx_alt_m -= sc.ground_alt_m;
        ChannelRealization ch = synth_channel(geom, params);
        ch.time_ns = t_ns;

        writer.append(apply_channel(tx_block, ch, sc.impairments, fs,
                                    mix_seed(sc.seed, k)));
        truth << tap_table_json(ch) << "\n";
        tx_rows.push_back(tx_fix);
        rx_rows.push_back(rx_fix);
    }
    if (!truth.flush())
        throw std::runtime_error("ground truth write failed: " +
                                 rec.truth_path.string());

    write_flight_log(rec.tx_log_path.string(), tx_rows);
    write_flight_log(rec.rx_log_path.string(), rx_rows);
    std::ofstream scen(rec.scenario_path);
    if (!scen)
        throw std::runtime_error("cannot write scenario: " +
                                 rec.scenario_path.string());
    scen << scenario_json(sc) << "\n";
    if (!scen.flush())
        throw std::runtime_error("scenario write failed: " +
                                 rec.scenario_path.string());

    rec.snapshot_count = writer.count();
    return rec;
}

ProcessOutput process_campaign(const MeasurementRecord& record,
                               const ProcessConfig& config,
                               const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    iqfile::IQReader reader(record.iq_path);
    const auto frame = iqfile::frame_from_meta(reader.meta());
    const auto tx_track = read_flight_log(record.tx_log_path.string());
    const auto rx_track = read_flight_log(record.rx_log_path.string());

    auto per = run_pipeline(reader, frame, tx_track, rx_track, config);

    ProcessOutput out;
    out.summary.total = per.size();
    std::ofstream cir_out(out_dir / "cir.jsonl");
    if (!cir_out)
        throw std::runtime_error("cannot write " +
                                 (out_dir / "cir.jsonl").string());
    std::vector<metrics::PathLossSample> pl_samples;
    std::vector<metrics::DelaySpreadResult> spreads;
    for (std::size_t i = 0; i < per.size(); ++i) {
        auto& r = per[i];
        if (!r.error.empty()) {
            if (!config.keep_going)
                throw std::runtime_error("snapshot " + std::to_string(i) +
                                         ": " + r.error);
            ++out.summary.failed;
            continue;
        }
        if (r.no_signal) {
            ++out.summary.excluded;
            continue;
        }
        out.rows.push_back(r.row);
        cir_out << r.cir_line << "\n";
        if (r.pl && r.pl->distance_m >= config.fit_d0_m)
            pl_samples.push_back(*r.pl);
        if (r.spread)
            spreads.push_back(*r.spread);
    }
    out.summary.processed = out.rows.size();
    if (pl_samples.size() >= 2) {
        try {
            out.summary.fit = metrics::fit_path_loss(pl_samples,
                                                     config.fit_d0_m);
        } catch (const std::invalid_argument&) {
            out.summary.fit = std::nullopt;
        }
    }
    if (!spreads.empty())
        out.summary.stats = metrics::campaign_stats(spreads);

    // Results table.
    std::ofstream csv(out_dir / "results.csv");
    if (!csv)
        throw std::runtime_error("cannot write " +
                                 (out_dir / "results.csv").string());
    csv << "time_ns,distance_m,pl_db,sigma_tau_ns,med_ns,num_taps\n";
    for (const auto& row : out.rows) {
        csv << row.time_ns << "," << format_double(row.distance_m, 3) << ","
            << (row.pl_db ? format_double(*row.pl_db, 3) : "nan") << ","
            << format_double(row.sigma_tau_ns, 4) << ","
            << format_double(row.med_ns, 4) << "," << row.num_taps << "\n";
    }
    if (!csv.flush())
        throw std::runtime_error("results write failed");

    // Summary with the resolved configuration.
    nlohmann::json j;
    j["snapshots"] = {{"total", out.summary.total},
                      {"processed", out.summary.processed},
                      {"excluded", out.summary.excluded},
                      {"failed", out.summary.failed}};
    if (out.summary.fit) {
        j["fit"] = {{"eta", out.summary.fit->eta},
                    {"pl0_db", out.summary.fit->pl0_db},
                    {"sigma_zeta_db", out.summary.fit->sigma_zeta_db},
                    {"d0_m", out.summary.fit->d0_m},
                    {"count", out.summary.fit->count}};
    } else {
        j["fit"] = nullptr;
    }
    if (out.summary.stats) {
        const auto& st = *out.summary.stats;
        j["sigma_tau_ns"] = {{"mean", st.mean_s * 1e9},
                             {"std", st.std_s * 1e9},
                             {"median", st.median_s * 1e9},
                             {"min", st.min_s * 1e9},
                             {"max", st.max_s * 1e9}};
    } else {
        j["sigma_tau_ns"] = nullptr;
    }
    j["config"] = {{"threshold_db", config.threshold_db},
                   {"noise_guard_db", config.noise_guard_db},
                   {"antenna_correction_db", config.antenna_correction_db},
                   {"cfo_align", config.cfo_align},
                   {"workers", config.workers},
                   {"fit_d0_m", config.fit_d0_m},
                   {"keep_going", config.keep_going}};
    if (config.tx_power_dbm)
        j["config"]["tx_power_dbm"] = *config.tx_power_dbm;
    else
        j["config"]["tx_power_dbm"] = nullptr;
    j["capture"] = {{"sample_rate_hz", reader.meta().sample_rate_hz},
                    {"center_freq_hz", reader.meta().center_freq_hz},
                    {"snapshot_len", reader.meta().snapshot_len},
                    {"snapshot_period_ms", reader.meta().snapshot_period_ms}};
    if (!record.scenario_path.empty() &&
        std::filesystem::exists(record.scenario_path)) {
        std::ifstream scen(record.scenario_path);
        nlohmann::json sj;
        try {
            scen >> sj;
            j["scenario"] = sj;
        } catch (const nlohmann::json::exception&) {
            // A malformed scenario echo never blocks processing results.
        }
    }
    std::ofstream sum(out_dir / "summary.json");
    if (!sum)
        throw std::runtime_error("cannot write " +
                                 (out_dir / "summary.json").string());
    sum << j.dump(2) << "\n";
    if (!sum.flush())
        throw std::runtime_error("summary write failed");
    return out;
}

ReplayReport replay_check(const MeasurementRecord& record,
                          const ProcessConfig& config,
                          const ReplayTolerances& tol) {
    ReplayReport rep;
    auto divergence = [&rep](std::size_t index, std::int64_t time_ns,
                             const std::string& what) {
        if (rep.failures == 0) {
            rep.first_divergent_index = index;
            rep.first_divergent_time_ns = time_ns;
            rep.detail = "snapshot " + std::to_string(index) + " (time " +
                         std::to_string(time_ns) + " ns): " + what;
        }
        ++rep.failures;
    };

    try {
        if (record.truth_path.empty())
            throw std::runtime_error("record has no ground truth");
        iqfile::IQReader reader(record.iq_path);
        const auto frame = iqfile::frame_from_meta(reader.meta());
        const double fs = reader.meta().sample_rate_hz;
        const auto tx_track = read_flight_log(record.tx_log_path.string());
        const auto rx_track = read_flight_log(record.rx_log_path.string());

        std::vector<ChannelRealization> truth;
        {
            std::ifstream in(record.truth_path);
            if (!in)
                throw std::runtime_error("cannot read ground truth: " +
                                         record.truth_path.string());
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty())
                    continue;
                truth.push_back(tap_table_from_json(line));
            }
        }
        if (truth.size() != reader.snapshot_count())
            throw std::runtime_error(
                "ground truth has " + std::to_string(truth.size()) +
                " entries for " + std::to_string(reader.snapshot_count()) +
                " snapshots");

        auto per = run_pipeline(reader, frame, tx_track, rx_track, config);
        for (std::size_t i = 0; i < per.size(); ++i) {
            const auto& r = per[i];
            const std::int64_t t_ns = truth[i].time_ns;
            ++rep.checked;
            if (!r.error.empty()) {
                divergence(i, t_ns, "processing failed: " + r.error);
                continue;
            }
            if (r.no_signal) {
                divergence(i, t_ns, "no signal recovered");
                continue;
            }
            const auto expected =
                expected_from_truth(truth[i], fs, config.threshold_db);
            if (expected.taps.empty()) {
                divergence(i, t_ns, "ground truth has no taps");
                continue;
            }
            if (r.cir.taps.size() != expected.taps.size()) {
                divergence(i, t_ns,
                           "expected " +
                               std::to_string(expected.taps.size()) +
                               " taps, recovered " +
                               std::to_string(r.cir.taps.size()));
                continue;
            }
            bool bad = false;
            for (std::size_t k = 0; k < expected.taps.size(); ++k) {
                const auto& m = r.cir.taps[k];
                const auto& e = expected.taps[k];
                const long long mbin = std::llround(m.delay_s * fs);
                if (mbin != e.rel_bin) {
                    divergence(i, t_ns,
                               "tap " + std::to_string(k) + " at bin " +
                                   std::to_string(mbin) + ", expected " +
                                   std::to_string(e.rel_bin));
                    bad = true;
                    break;
                }
                if (std::abs(m.rel_power_db - e.rel_power_db) >
                    tol.power_db) {
                    divergence(
                        i, t_ns,
                        "tap " + std::to_string(k) + " power " +
                            format_double(m.rel_power_db, 2) +
                            " dB, expected " +
                            format_double(e.rel_power_db, 2) + " dB");
                    bad = true;
                    break;
                }
            }
            if (bad)
                continue;
            if (config.tx_power_dbm && r.pl) {
                const double expected_pl =
                    -db_from_power(expected.total_gain_mw);
                if (std::abs(r.pl->pl_db - expected_pl) > tol.pl_db) {
                    divergence(i, t_ns,
                               "path loss " + format_double(r.pl->pl_db, 2) +
                                   " dB, expected " +
                                   format_double(expected_pl, 2) + " dB");
                    continue;
                }
            }
            if (r.spread &&
                std::abs(r.spread->sigma_tau_s - expected.sigma_tau_s) >
                    tol.sigma_tau_s) {
                divergence(
                    i, t_ns,
                    "delay spread " +
                        format_double(r.spread->sigma_tau_s * 1e9, 2) +
                        " ns, expected " +
                        format_double(expected.sigma_tau_s * 1e9, 2) + " ns");
                continue;
            }
        }
    } catch (const std::exception& e) {
        divergence(rep.checked, 0, e.what());
    }
    rep.pass = rep.failures == 0;
    return rep;
}

}  // namespace skysounder::campaign
