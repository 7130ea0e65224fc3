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

#include "skysounder/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

#include "skysounder/campaign.hpp"
#include "skysounder/chanmodel.hpp"
#include "skysounder/common.hpp"
#include "skysounder/iqfile.hpp"
#include "skysounder/metrics.hpp"
#include "skysounder/waveform.hpp"

namespace skysounder::cli {

namespace {

namespace fs = std::filesystem;

struct RunConfig {
    // Global.
    std::uint64_t seed = 1;
    std::string out = ".";
    std::string format = "csv";
    int decimate = 1;
    bool keep_going = false;
    std::string config_file;
    // gen-waveform.
    unsigned degree = 12;
    int repeats = 20;
    int samples_per_chip = 1;
    double chip_ns = 20.0;
    double center_freq_hz = 3.5e9;
    // simulate.
    std::string preset = "a2a";
    std::string scenario_file;
    std::string channel = "two-ray";
    double speed_mps = 3.0;
    double tx_power_dbm = 30.0;
    double cfo_hz = 0.0;
    double noise_density_dbm_hz = -174.0;
    double snapshot_period_ms = 100.0;
    // process / fit / report.
    std::string in;
    double threshold_db = 20.0;
    double noise_guard_db = 6.0;
    double antenna_correction_db = 0.0;
    std::string tx_pattern_file;
    std::string rx_pattern_file;
    bool no_cfo = false;
    int workers = 0;
    double d0_m = 1.0;
    bool replay = false;
};

// One configurable setting: every CLI option that can set it (the same key
// may surface on several subcommands) plus how to read it from the config
// file and how to echo it.
struct Setting {
    std::vector<CLI::Option*> opts;
    std::function<void(const nlohmann::json&)> from_json;
    std::function<nlohmann::json()> to_json;

    bool given_on_command_line() const {
        for (const auto* o : opts)
            if (o->count() > 0)
                return true;
        return false;
    }
};

using SettingTable = std::map<std::string, Setting>;

template <typename T>
void bind_setting(SettingTable& table, CLI::Option* opt,
                  const std::string& key, T* target) {
    auto it = table.find(key);
    if (it != table.end()) {
        it->second.opts.push_back(opt);
        return;
    }
    Setting s;
    s.opts = {opt};
    s.from_json = [target](const nlohmann::json& v) { *target = v.get<T>(); };
    s.to_json = [target]() { return nlohmann::json(*target); };
    table[key] = std::move(s);
}

// Settings given on the command line win over the config file, which wins
// over defaults. Returns the set of keys that were explicitly set.
std::set<std::string> apply_config_file(const SettingTable& table,
                                        const std::string& config_file) {
    std::set<std::string> set_keys;
    nlohmann::json j;
    if (!config_file.empty()) {
        std::ifstream in(config_file);
        if (!in)
            throw std::runtime_error("cannot read config file: " +
                                     config_file);
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("malformed config file " + config_file +
                                     ": " + e.what());
        }
        if (!j.is_object())
            throw std::runtime_error("config file " + config_file +
                                     " must hold a JSON object");
        for (const auto& [key, value] : j.items()) {
            const auto it = table.find(key);
            if (it == table.end())
                throw std::runtime_error("unknown config key: " + key);
            if (!it->second.given_on_command_line())
                it->second.from_json(value);
            set_keys.insert(key);
        }
    }
    for (const auto& [key, setting] : table)
        if (setting.given_on_command_line())
            set_keys.insert(key);
    return set_keys;
}

void echo_run_config(const std::string& subcommand, const SettingTable& table,
                     const fs::path& out_dir) {
    nlohmann::json j;
    j["subcommand"] = subcommand;
    for (const auto& [key, setting] : table)
        j[key] = setting.to_json();
    fs::create_directories(out_dir);
    std::ofstream out(out_dir / "run_config.json");
    if (!out)
        throw std::runtime_error("cannot write " +
                                 (out_dir / "run_config.json").string());
    out << j.dump(2) << "\n";
    if (!out.flush())
        throw std::runtime_error("run_config write failed");
}

PathLossKind channel_kind_from_flag(const std::string& name) {
    if (name == "fspl" || name == "free-space")
        return PathLossKind::free_space;
    if (name == "fe2r" || name == "two-ray")
        return PathLossKind::flat_earth_two_ray;
    if (name == "log-distance" || name == "log")
        return PathLossKind::log_distance;
    throw std::runtime_error("unknown channel model: " + name);
}

std::string format_fixed(double v, int precision) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

// Results table rows as written by the process subcommand.
struct ResultRow {
    std::int64_t time_ns = 0;
    double distance_m = 0.0;
    double pl_db = 0.0;
    double sigma_tau_ns = 0.0;
    double med_ns = 0.0;
    std::size_t num_taps = 0;
};

std::vector<ResultRow> read_results_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read results table: " +
                                 path.string());
    std::string line;
    if (!std::getline(in, line) ||
        line.rfind("time_ns,distance_m,pl_db", 0) != 0)
        throw std::runtime_error("unexpected results header in " +
                                 path.string());
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream ls(line);
        std::string cell;
        ResultRow r;
        auto next = [&](const char* what) {
            if (!std::getline(ls, cell, ','))
                throw std::runtime_error(std::string("results row missing ") +
                                         what + " in " + path.string());
            return cell;
        };
        r.time_ns = std::stoll(next("time_ns"));
        r.distance_m = std::stod(next("distance_m"));
        r.pl_db = std::stod(next("pl_db"));
        r.sigma_tau_ns = std::stod(next("sigma_tau_ns"));
        r.med_ns = std::stod(next("med_ns"));
        r.num_taps = std::stoull(next("num_taps"));
        rows.push_back(r);
    }
    return rows;
}

int cmd_gen_waveform(const RunConfig& cfg, const SettingTable& table,
                     std::ostream& out) {
    waveform::MSequenceSpec spec;
    spec.degree = cfg.degree;
    spec.taps = waveform::default_taps(cfg.degree);
    const auto frame = waveform::build_frame(spec, cfg.repeats,
                                             cfg.samples_per_chip,
                                             cfg.chip_ns * 1e-9);

    iqfile::IQFileMeta meta;
    meta.sample_rate_hz = frame.sample_rate_hz();
    meta.center_freq_hz = cfg.center_freq_hz;
    meta.snapshot_len = frame.sample_count();
    meta.snapshot_period_ms = 100.0;
    meta.start_time_ns = 0;
    meta.sequence = spec;
    meta.repeats = cfg.repeats;

    const fs::path out_dir(cfg.out);
    fs::create_directories(out_dir);
    iqfile::IQWriter writer(out_dir / "waveform.iq", meta);
    writer.append(waveform::frame_samples(frame, 1.0));

    const double gain =
        waveform::processing_gain_db(spec.sequence_length(), cfg.repeats);
    out << "sequence length: " << spec.sequence_length() << "\n";
    out << "snapshot samples: " << frame.sample_count() << "\n";
    out << "processing gain: " << format_fixed(gain, 2) << " dB\n";
    out << "written: " << (out_dir / "waveform.iq").string() << "\n";
    echo_run_config("gen-waveform", table, out_dir);
    return 0;
}

int cmd_simulate(const RunConfig& cfg, const SettingTable& table,
                 const std::set<std::string>& set_keys, std::ostream& out) {
    campaign::CampaignScenario sc;
    if (!cfg.scenario_file.empty()) {
        std::ifstream in(cfg.scenario_file);
        if (!in)
            throw std::runtime_error("cannot read scenario: " +
                                     cfg.scenario_file);
        std::stringstream buf;
        buf << in.rdbuf();
        sc = campaign::scenario_from_json(buf.str());
    } else {
        sc = campaign::build_scenario(cfg.preset);
    }

    const auto is_set = [&](const char* key) {
        return set_keys.count(key) > 0;
    };
    if (is_set("channel"))
        sc.channel_kind = channel_kind_from_flag(cfg.channel);
    if (is_set("speed_mps"))
        sc.speed_mps = cfg.speed_mps;
    if (is_set("tx_power_dbm"))
        sc.tx_power_dbm = cfg.tx_power_dbm;
    if (is_set("cfo_hz"))
        sc.impairments.cfo_hz = cfg.cfo_hz;
    if (is_set("noise_density_dbm_hz"))
        sc.impairments.noise_density_dbm_hz = cfg.noise_density_dbm_hz;
    if (is_set("snapshot_period_ms"))
        sc.snapshot_period_ms = cfg.snapshot_period_ms;
    if (is_set("seed"))
        sc.seed = cfg.seed;

    const fs::path out_dir(cfg.out);
    const auto rec = campaign::simulate_campaign(sc, out_dir, cfg.decimate);
    const auto bytes = fs::file_size(rec.iq_path);
    out << "snapshots: " << rec.snapshot_count << "\n";
    out << "bytes: " << bytes << "\n";
    out << "written: " << rec.iq_path.string() << "\n";
    echo_run_config("simulate", table, out_dir);
    return 0;
}

int cmd_process(const RunConfig& cfg, const SettingTable& table,
                const std::set<std::string>& set_keys, std::ostream& out) {
    if (cfg.in.empty())
        throw std::runtime_error("process: --in campaign directory required");
    const auto rec = campaign::record_in_dir(cfg.in);

    campaign::ProcessConfig pc;
    pc.threshold_db = cfg.threshold_db;
    pc.noise_guard_db = cfg.noise_guard_db;
    pc.antenna_correction_db = cfg.antenna_correction_db;
    pc.cfo_align = !cfg.no_cfo;
    pc.workers = cfg.workers;
    pc.fit_d0_m = cfg.d0_m;
    pc.keep_going = cfg.keep_going;
    if (!cfg.tx_pattern_file.empty())
        pc.tx_pattern = read_pattern_csv(cfg.tx_pattern_file);
    if (!cfg.rx_pattern_file.empty())
        pc.rx_pattern = read_pattern_csv(cfg.rx_pattern_file);

    // Transmit power: explicit setting wins, else the recorded scenario.
    if (set_keys.count("tx_power_dbm") > 0) {
        pc.tx_power_dbm = cfg.tx_power_dbm;
    } else if (!rec.scenario_path.empty()) {
        std::ifstream scen(rec.scenario_path);
        nlohmann::json sj;
        scen >> sj;
        if (sj.contains("tx_power_dbm"))
            pc.tx_power_dbm = sj["tx_power_dbm"].get<double>();
    }

    const fs::path out_dir(cfg.out);
    const auto result = campaign::process_campaign(rec, pc, out_dir);
    out << "snapshots: " << result.summary.total << "\n";
    out << "processed: " << result.summary.processed << "\n";
    out << "excluded: " << result.summary.excluded << "\n";
    out << "failed: " << result.summary.failed << "\n";
    if (result.summary.fit) {
        out << "eta: " << format_fixed(result.summary.fit->eta, 3) << "\n";
        out << "pl0_db: " << format_fixed(result.summary.fit->pl0_db, 3)
            << "\n";
        out << "sigma_zeta_db: "
            << format_fixed(result.summary.fit->sigma_zeta_db, 3) << "\n";
    }
    echo_run_config("process", table, out_dir);

    if (cfg.replay) {
        campaign::ReplayTolerances tol;
        const auto rep = campaign::replay_check(rec, pc, tol);
        out << "replay: " << (rep.pass ? "pass" : "fail") << " ("
            << rep.failures << " of " << rep.checked << " divergent)\n";
        if (!rep.pass) {
            out << "replay detail: " << rep.detail << "\n";
            return 1;
        }
    }
    return 0;
}

int cmd_fit(const RunConfig& cfg, const SettingTable& table,
            std::ostream& out) {
    if (cfg.in.empty())
        throw std::runtime_error("fit: --in results.csv required");
    const auto rows = read_results_csv(cfg.in);
    std::vector<metrics::PathLossSample> samples;
    for (const auto& r : rows) {
        if (!std::isfinite(r.pl_db) || r.distance_m < cfg.d0_m)
            continue;
        samples.push_back({r.distance_m, r.pl_db, r.time_ns});
    }
    const auto fit = metrics::fit_path_loss(samples, cfg.d0_m);

    nlohmann::json j = {{"eta", fit.eta},
                        {"pl0_db", fit.pl0_db},
                        {"sigma_zeta_db", fit.sigma_zeta_db},
                        {"d0_m", fit.d0_m},
                        {"count", fit.count}};
    const fs::path out_dir(cfg.out);
    fs::create_directories(out_dir);
    if (cfg.format == "json") {
        out << j.dump(2) << "\n";
        std::ofstream f(out_dir / "fit.json");
        f << j.dump(2) << "\n";
    } else {
        std::ostringstream csv;
        csv << "eta,pl0_db,sigma_zeta_db,d0_m,count\n"
            << format_fixed(fit.eta, 6) << "," << format_fixed(fit.pl0_db, 6)
            << "," << format_fixed(fit.sigma_zeta_db, 6) << ","
            << format_fixed(fit.d0_m, 6) << "," << fit.count << "\n";
        out << csv.str();
        std::ofstream f(out_dir / "fit.csv");
        f << csv.str();
    }
    echo_run_config("fit", table, out_dir);
    return 0;
}

int cmd_report(const RunConfig& cfg, const SettingTable& table,
               std::ostream& out) {
    if (cfg.in.empty())
        throw std::runtime_error("report: --in processed directory required");
    const fs::path in_dir(cfg.in);
    const auto rows = read_results_csv(in_dir / "results.csv");

    // Reference context from the processing summary.
    std::optional<metrics::PathLossFit> fit;
    double wavelength = wavelength_m(3.5e9);
    std::optional<double> tx_height_m;
    std::optional<double> rx_height_m;
    {
        std::ifstream in(in_dir / "summary.json");
        if (!in)
            throw std::runtime_error("cannot read summary: " +
                                     (in_dir / "summary.json").string());
        nlohmann::json j;
        in >> j;
        if (j.contains("fit") && !j["fit"].is_null()) {
            metrics::PathLossFit f;
            f.eta = j["fit"]["eta"].get<double>();
            f.pl0_db = j["fit"]["pl0_db"].get<double>();
            f.sigma_zeta_db = j["fit"]["sigma_zeta_db"].get<double>();
            f.d0_m = j["fit"]["d0_m"].get<double>();
            fit = f;
        }
        if (j.contains("capture"))
            wavelength =
                wavelength_m(j["capture"]["center_freq_hz"].get<double>());
        if (j.contains("scenario") && !j["scenario"].is_null()) {
            const auto& sc = j["scenario"];
            const double ground = sc.value("ground_alt_m", 0.0);
            if (sc.contains("tx_waypoints") && !sc["tx_waypoints"].empty())
                tx_height_m =
                    sc["tx_waypoints"][0]["alt_m"].get<double>() - ground;
            if (sc.contains("rx_position"))
                rx_height_m =
                    sc["rx_position"]["alt_m"].get<double>() - ground;
        }
    }

    const fs::path out_dir(cfg.out);
    fs::create_directories(out_dir);

    std::ofstream pl(out_dir / "pl_vs_distance.csv");
    pl << "distance_m,pl_meas_db,pl_fit_db,pl_fspl_db,pl_fe2r_db\n";
    for (const auto& r : rows) {
        if (!std::isfinite(r.pl_db))
            continue;
        const double d = r.distance_m;
        double fit_db = std::nan("");
        if (fit)
            fit_db = fit->pl0_db +
                     fit->eta * 10.0 * std::log10(d / fit->d0_m);
        const double fspl = fspl_db(d, wavelength);
        double fe2r = std::nan("");
        if (tx_height_m && rx_height_m) {
            const double dh = *tx_height_m - *rx_height_m;
            if (d > std::abs(dh)) {
                const double horiz = std::sqrt(d * d - dh * dh);
                fe2r = fe2r_pl_db(horiz, *tx_height_m, *rx_height_m,
                                  wavelength);
            }
        }
        pl << format_fixed(d, 3) << "," << format_fixed(r.pl_db, 3) << ","
           << format_fixed(fit_db, 3) << "," << format_fixed(fspl, 3) << ","
           << format_fixed(fe2r, 3) << "\n";
    }
    if (!pl.flush())
        throw std::runtime_error("report write failed");

    std::ofstream st(out_dir / "sigma_tau_vs_distance.csv");
    st << "distance_m,sigma_tau_ns\n";
    for (const auto& r : rows)
        st << format_fixed(r.distance_m, 3) << ","
           << format_fixed(r.sigma_tau_ns, 4) << "\n";
    if (!st.flush())
        throw std::runtime_error("report write failed");

    std::ofstream pdp(out_dir / "pdp_long.csv");
    pdp << "distance_m,delay_ns,power_db\n";
    {
        std::ifstream cir(in_dir / "cir.jsonl");
        std::string line;
        while (cir && std::getline(cir, line)) {
            if (line.empty())
                continue;
            const auto j = nlohmann::json::parse(line);
            const double d = j["distance_m"].get<double>();
            for (const auto& tap : j["taps"])
                pdp << format_fixed(d, 3) << ","
                    << format_fixed(tap["delay_ns"].get<double>(), 3) << ","
                    << format_fixed(tap["rel_power_db"].get<double>(), 3)
                    << "\n";
        }
    }
    if (!pdp.flush())
        throw std::runtime_error("report write failed");

    out << "written: " << (out_dir / "pl_vs_distance.csv").string() << "\n";
    out << "written: " << (out_dir / "sigma_tau_vs_distance.csv").string()
        << "\n";
    out << "written: " << (out_dir / "pdp_long.csv").string() << "\n";
    echo_run_config("report", table, out_dir);
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    RunConfig cfg;
    SettingTable table;

    CLI::App app{"correlation channel sounding toolkit for drone radio links",
                 "skysounder"};
    app.require_subcommand(1);

    bind_setting(table, app.add_option("--seed", cfg.seed, "Base random seed"),
                 "seed", &cfg.seed);
    bind_setting(table,
                 app.add_option("--out", cfg.out, "Output directory"), "out",
                 &cfg.out);
    bind_setting(table,
                 app.add_option("--format", cfg.format,
                                "Output format: csv or json")
                     ->check(CLI::IsMember({"csv", "json"})),
                 "format", &cfg.format);
    bind_setting(table,
                 app.add_option("--decimate", cfg.decimate,
                                "Keep every Nth snapshot")
                     ->check(CLI::PositiveNumber),
                 "decimate", &cfg.decimate);
    bind_setting(table,
                 app.add_flag("--keep-going", cfg.keep_going,
                              "Continue past per-snapshot failures"),
                 "keep_going", &cfg.keep_going);
    auto* config_opt = app.add_option("--config", cfg.config_file,
                                      "JSON config file (defaults < file < "
                                      "flags)");

    auto* gen = app.add_subcommand("gen-waveform",
                                   "Write the sounding waveform and sidecar");
    gen->fallthrough();
    bind_setting(table,
                 gen->add_option("--degree", cfg.degree,
                                 "Register length of the code generator"),
                 "degree", &cfg.degree);
    bind_setting(table,
                 gen->add_option("--repeats", cfg.repeats,
                                 "Sequence periods per snapshot"),
                 "repeats", &cfg.repeats);
    bind_setting(table,
                 gen->add_option("--samples-per-chip", cfg.samples_per_chip,
                                 "Oversampling per chip"),
                 "samples_per_chip", &cfg.samples_per_chip);
    bind_setting(table,
                 gen->add_option("--chip-ns", cfg.chip_ns,
                                 "Chip duration in nanoseconds"),
                 "chip_ns", &cfg.chip_ns);
    bind_setting(table,
                 gen->add_option("--center-freq-hz", cfg.center_freq_hz,
                                 "Carrier frequency in Hz"),
                 "center_freq_hz", &cfg.center_freq_hz);

    auto* sim = app.add_subcommand("simulate",
                                   "Synthesize a measurement flight");
    sim->fallthrough();
    bind_setting(table,
                 sim->add_option("--preset", cfg.preset,
                                 "Scenario preset: a2a or a2g")
                     ->check(CLI::IsMember({"a2a", "a2g"})),
                 "preset", &cfg.preset);
    bind_setting(table,
                 sim->add_option("--scenario", cfg.scenario_file,
                                 "Scenario JSON file (overrides --preset)"),
                 "scenario", &cfg.scenario_file);
    bind_setting(table,
                 sim->add_option("--channel", cfg.channel,
                                 "Channel model: fspl, fe2r or log-distance"),
                 "channel", &cfg.channel);
    bind_setting(table,
                 sim->add_option("--speed-mps", cfg.speed_mps,
                                 "Transmitter ground speed in m/s"),
                 "speed_mps", &cfg.speed_mps);
    bind_setting(table,
                 sim->add_option("--tx-power-dbm", cfg.tx_power_dbm,
                                 "Transmit power in dBm"),
                 "tx_power_dbm", &cfg.tx_power_dbm);
    bind_setting(table,
                 sim->add_option("--cfo-hz", cfg.cfo_hz,
                                 "Injected residual carrier offset in Hz"),
                 "cfo_hz", &cfg.cfo_hz);
    bind_setting(table,
                 sim->add_option("--noise-density-dbm-hz",
                                 cfg.noise_density_dbm_hz,
                                 "Receiver noise density in dBm/Hz"),
                 "noise_density_dbm_hz", &cfg.noise_density_dbm_hz);
    bind_setting(table,
                 sim->add_option("--snapshot-period-ms",
                                 cfg.snapshot_period_ms,
                                 "Snapshot period in milliseconds"),
                 "snapshot_period_ms", &cfg.snapshot_period_ms);

    auto* proc = app.add_subcommand("process",
                                    "Run the pipeline over a campaign");
    proc->fallthrough();
    bind_setting(table, proc->add_option("--in", cfg.in, "Campaign directory"),
                 "in", &cfg.in);
    bind_setting(table,
                 proc->add_option("--threshold-db", cfg.threshold_db,
                                  "Tap retention threshold below the direct "
                                  "path, dB"),
                 "threshold_db", &cfg.threshold_db);
    bind_setting(table,
                 proc->add_option("--noise-guard-db", cfg.noise_guard_db,
                                  "Margin above the noise floor, dB"),
                 "noise_guard_db", &cfg.noise_guard_db);
    // The same key also carries the calibration into processing.
    bind_setting(table,
                 proc->add_option("--tx-power-dbm", cfg.tx_power_dbm,
                                  "Transmit power behind the capture, dBm"),
                 "tx_power_dbm", &cfg.tx_power_dbm);
    bind_setting(table,
                 proc->add_option("--antenna-correction-db",
                                  cfg.antenna_correction_db,
                                  "Fixed combined antenna gain, dB"),
                 "antenna_correction_db", &cfg.antenna_correction_db);
    bind_setting(table,
                 proc->add_option("--tx-pattern", cfg.tx_pattern_file,
                                  "Transmit antenna pattern CSV"),
                 "tx_pattern", &cfg.tx_pattern_file);
    bind_setting(table,
                 proc->add_option("--rx-pattern", cfg.rx_pattern_file,
                                  "Receive antenna pattern CSV"),
                 "rx_pattern", &cfg.rx_pattern_file);
    bind_setting(table,
                 proc->add_flag("--no-cfo", cfg.no_cfo,
                                "Skip carrier alignment"),
                 "no_cfo", &cfg.no_cfo);
    bind_setting(table,
                 proc->add_option("--workers", cfg.workers,
                                  "Parallel snapshot workers (0 = auto)"),
                 "workers", &cfg.workers);
    bind_setting(table,
                 proc->add_flag("--replay", cfg.replay,
                                "Verify against recorded ground truth"),
                 "replay", &cfg.replay);

    auto* fitc = app.add_subcommand("fit", "Fit the distance-loss model");
    fitc->fallthrough();
    bind_setting(table, fitc->add_option("--in", cfg.in, "results.csv path"),
                 "in", &cfg.in);
    bind_setting(table,
                 fitc->add_option("--d0-m", cfg.d0_m,
                                  "Reference distance in meters"),
                 "d0_m", &cfg.d0_m);
    bind_setting(table,
                 proc->add_option("--fit-d0-m", cfg.d0_m,
                                  "Reference distance for the fit, meters"),
                 "d0_m", &cfg.d0_m);

    auto* rep = app.add_subcommand("report", "Write plot-ready CSV bundles");
    rep->fallthrough();
    bind_setting(table,
                 rep->add_option("--in", cfg.in,
                                 "Processed output directory"),
                 "in", &cfg.in);

    try {
        std::vector<const char*> argv;
        argv.push_back("skysounder");
        for (const auto& a : args)
            argv.push_back(a.c_str());
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        (void)config_opt;
        const auto set_keys = apply_config_file(table, cfg.config_file);

        if (app.got_subcommand("gen-waveform"))
            return cmd_gen_waveform(cfg, table, out);
        if (app.got_subcommand("simulate"))
            return cmd_simulate(cfg, table, set_keys, out);
        if (app.got_subcommand("process"))
            return cmd_process(cfg, table, set_keys, out);
        if (app.got_subcommand("fit"))
            return cmd_fit(cfg, table, out);
        if (app.got_subcommand("report"))
            return cmd_report(cfg, table, out);
        err << "error: no subcommand selected\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace skysounder::cli
