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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skysounder/chanmodel.hpp"
#include "skysounder/geometry.hpp"
#include "skysounder/metrics.hpp"
#include "skysounder/waveform.hpp"

namespace skysounder::campaign {

enum class RxMode { airborne_static, ground_mast };

// Declarative description of one measurement flight: a static receiver, a
// transmitter moving along a waypoint polyline at constant speed, and the
// waveform, channel and impairment settings used to synthesize the capture.
struct CampaignScenario {
    std::string name = "custom";
    RxMode rx_mode = RxMode::airborne_static;
    GeoFix rx_position;
    std::vector<GeoFix> tx_waypoints;
    double speed_mps = 3.0;
    double snapshot_period_ms = 100.0;
    // Altitude of the reflecting plane; heights above it feed the two-ray
    // model.
    double ground_alt_m = 0.0;
    waveform::MSequenceSpec sequence;
    int repeats = 20;
    int samples_per_chip = 1;
    double chip_duration_s = 20e-9;
    double center_freq_hz = 3.5e9;
    double tx_power_dbm = 30.0;
    PathLossKind channel_kind = PathLossKind::flat_earth_two_ray;
    double channel_eta = 2.0;
    double channel_pl0_db = 0.0;
    double channel_d0_m = 1.0;
    ImpairmentSpec impairments;
    std::uint64_t seed = 1;
};

// Paths of a persisted campaign. truth_path is empty for captures without
// synthesized ground truth.
struct MeasurementRecord {
    std::filesystem::path dir;
    std::filesystem::path iq_path;
    std::filesystem::path tx_log_path;
    std::filesystem::path rx_log_path;
    std::filesystem::path truth_path;
    std::filesystem::path scenario_path;
    std::size_t snapshot_count = 0;
};

// Presets: "a2a" puts both platforms at 100 m altitude; "a2g" puts the
// receiver on a 3 m mast. Either way the transmitter starts 85 m east of
// the receiver and flies 1 km further east at 3 m/s, one snapshot every
// 100 ms. Throws std::invalid_argument on an unknown preset name.
CampaignScenario build_scenario(const std::string& preset);

// Rejects inconsistent scenarios (empty trajectory, nonpositive speed or
// period, bad waveform parameters) with std::invalid_argument.
void validate_scenario(const CampaignScenario& scenario);

// Snapshot count of the full-rate flight: floor(duration / period) + 1,
// where duration is trajectory length over speed. A zero-length trajectory
// yields exactly one snapshot.
std::size_t snapshot_count(const CampaignScenario& scenario);

// Channel parameters implied by the scenario (wavelength from the carrier).
PathLossModelParams channel_params(const CampaignScenario& scenario);

// JSON round trip for scenario files.
std::string scenario_json(const CampaignScenario& scenario);
CampaignScenario scenario_from_json(const std::string& text);

// Resolves the standard file names inside a campaign directory and checks
// that the capture and both flight logs exist; throws std::runtime_error
// naming the first missing file.
MeasurementRecord record_in_dir(const std::filesystem::path& dir);

// Synthesizes the flight: for every kept snapshot, interpolates the
// transmitter position, derives the link geometry, synthesizes the channel,
// applies it to the sounding frame and appends the capture. Writes the IQ
// container with sidecar, both flight logs, a ground-truth tap table
// (JSON-lines) and the resolved scenario. decimate keeps every Nth
// snapshot. Deterministic for a given (scenario, seed).
MeasurementRecord simulate_campaign(const CampaignScenario& scenario,
                                    const std::filesystem::path& out_dir,
                                    int decimate = 1);

struct ProcessConfig {
    double threshold_db = 20.0;
    double noise_guard_db = 6.0;
    // Absolute calibration; absent means relative-only processing.
    std::optional<double> tx_power_dbm;
    double antenna_correction_db = 0.0;
    // When both patterns are set the correction is evaluated per snapshot
    // from the link geometry instead of the fixed value above.
    std::optional<AntennaPattern> tx_pattern;
    std::optional<AntennaPattern> rx_pattern;
    bool cfo_align = true;
    // 0 means use the available hardware parallelism.
    int workers = 0;
    double fit_d0_m = 1.0;
    // Keep processing past per-snapshot failures; they are counted.
    bool keep_going = false;
};

// One line of the results table.
struct SnapshotRow {
    std::int64_t time_ns = 0;
    double distance_m = 0.0;
    std::optional<double> pl_db;
    double sigma_tau_ns = 0.0;
    double med_ns = 0.0;
    std::size_t num_taps = 0;
};

struct ProcessSummary {
    std::size_t total = 0;
    std::size_t processed = 0;
    // Snapshots with no detectable signal, excluded from the aggregates.
    std::size_t excluded = 0;
    // Snapshots that raised an error under keep_going.
    std::size_t failed = 0;
    std::optional<metrics::PathLossFit> fit;
    std::optional<metrics::CampaignStats> stats;
};

struct ProcessOutput {
    std::vector<SnapshotRow> rows;
    ProcessSummary summary;
};

// Runs the full pipeline (trim, frequency alignment, correlation, tap
// extraction, metrics) over every snapshot, in parallel batches with
// results ordered by timestamp. Writes cir.jsonl, results.csv and
// summary.json into out_dir and returns the same content.
ProcessOutput process_campaign(const MeasurementRecord& record,
                               const ProcessConfig& config,
                               const std::filesystem::path& out_dir);

struct ReplayTolerances {
    // Tap delays must land on the exact sample bin; powers, loss and spread
    // within these bounds.
    double power_db = 0.5;
    double pl_db = 0.5;
    double sigma_tau_s = 2e-9;
};

struct ReplayReport {
    bool pass = false;
    std::size_t checked = 0;
    std::size_t failures = 0;
    std::size_t first_divergent_index = 0;
    std::int64_t first_divergent_time_ns = 0;
    // Human-readable description of the first divergence.
    std::string detail;
};

// Re-processes the capture and compares every snapshot against the recorded
// ground truth: truth taps are quantized to the sample grid, merged per bin
// and thresholded like the extractor; delays must match bin-exactly and
// powers, path loss and delay spread within the tolerances. Failures are
// counted, never thrown; the first divergent snapshot is identified.
ReplayReport replay_check(const MeasurementRecord& record,
                          const ProcessConfig& config,
                          const ReplayTolerances& tol = {});

}  // namespace skysounder::campaign
