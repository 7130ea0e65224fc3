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

#include "skysounder/iqfile.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

// The container format is little-endian; bulk I/O below relies on the host
// matching it. Big-endian hosts would need per-float byte swaps here.
static_assert(std::endian::native == std::endian::little,
              "IQ container I/O assumes a little-endian host");

namespace skysounder::iqfile {

namespace {

constexpr std::size_t k_bytes_per_sample = 2 * sizeof(float);

nlohmann::json meta_to_json(const IQFileMeta& meta) {
    nlohmann::json j;
    j["sample_rate_hz"] = meta.sample_rate_hz;
    j["center_freq_hz"] = meta.center_freq_hz;
    j["snapshot_len"] = meta.snapshot_len;
    j["snapshot_period_ms"] = meta.snapshot_period_ms;
    j["start_time_ns"] = meta.start_time_ns;
    j["waveform"] = {{"degree", meta.sequence.degree},
                     {"taps", meta.sequence.taps},
                     {"seed", meta.sequence.seed},
                     {"repeats", meta.repeats}};
    return j;
}

IQFileMeta meta_from_json(const nlohmann::json& j) {
    IQFileMeta meta;
    meta.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    meta.center_freq_hz = j.at("center_freq_hz").get<double>();
    meta.snapshot_len = j.at("snapshot_len").get<std::size_t>();
    meta.snapshot_period_ms = j.at("snapshot_period_ms").get<double>();
    meta.start_time_ns = j.at("start_time_ns").get<std::int64_t>();
    const auto& w = j.at("waveform");
    meta.sequence.degree = w.at("degree").get<unsigned>();
    meta.sequence.taps = w.at("taps").get<std::vector<unsigned>>();
    meta.sequence.seed = w.at("seed").get<std::uint32_t>();
    meta.repeats = w.at("repeats").get<int>();
    return meta;
}

void validate_meta(const IQFileMeta& meta) {
    if (!(meta.sample_rate_hz > 0.0))
        throw std::invalid_argument("IQ container: sample rate must be > 0");
    if (meta.snapshot_len == 0)
        throw std::invalid_argument("IQ container: snapshot length is zero");
    if (meta.repeats < 1)
        throw std::invalid_argument("IQ container: repeats must be >= 1");
    if (!(meta.snapshot_period_ms > 0.0))
        throw std::invalid_argument(
            "IQ container: snapshot period must be > 0");
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& iq_path) {
    std::filesystem::path p = iq_path;
    p += ".json";
    return p;
}

waveform::SoundingFrame frame_from_meta(const IQFileMeta& meta) {
    validate_meta(meta);
    const std::size_t length = meta.sequence.sequence_length();
    const std::size_t per_period = length * std::size_t(meta.repeats);
    if (per_period == 0 || meta.snapshot_len % per_period != 0)
        throw std::invalid_argument(
            "IQ container: snapshot length is not a whole number of "
            "sequence periods");
    const int per_chip = int(meta.snapshot_len / per_period);
    const double chip_s = double(per_chip) / meta.sample_rate_hz;
    return waveform::build_frame(meta.sequence, meta.repeats, per_chip,
                                 chip_s);
}

IQWriter::IQWriter(const std::filesystem::path& iq_path,
                   const IQFileMeta& meta)
    : path_(iq_path), snapshot_len_(meta.snapshot_len) {
    validate_meta(meta);
    std::ofstream side(sidecar_path(iq_path));
    if (!side)
        throw std::runtime_error("cannot write sidecar: " +
                                 sidecar_path(iq_path).string());
    side << meta_to_json(meta).dump(2) << "\n";
    if (!side.flush())
        throw std::runtime_error("sidecar write failed: " +
                                 sidecar_path(iq_path).string());

    out_.open(iq_path, std::ios::binary | std::ios::trunc);
    if (!out_)
        throw std::runtime_error("cannot write IQ file: " + iq_path.string());
}

void IQWriter::append(const std::vector<cxf>& samples) {
    if (samples.size() != snapshot_len_)
        throw std::invalid_argument(
            "IQ append: snapshot has " + std::to_string(samples.size()) +
            " samples, container stride is " + std::to_string(snapshot_len_));
    out_.write(reinterpret_cast<const char*>(samples.data()),
               std::streamsize(samples.size() * k_bytes_per_sample));
    if (!out_)
        throw std::runtime_error("IQ write failed: " + path_.string());
    ++count_;
}

IQReader::IQReader(const std::filesystem::path& iq_path) : path_(iq_path) {
    std::ifstream side(sidecar_path(iq_path));
    if (!side)
        throw std::runtime_error("cannot read sidecar: " +
                                 sidecar_path(iq_path).string());
    nlohmann::json j;
    try {
        side >> j;
        meta_ = meta_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed sidecar " +
                                 sidecar_path(iq_path).string() + ": " +
                                 e.what());
    }
    validate_meta(meta_);

    in_.open(iq_path, std::ios::binary);
    if (!in_)
        throw std::runtime_error("cannot read IQ file: " + iq_path.string());
    in_.seekg(0, std::ios::end);
    const auto bytes = std::uint64_t(in_.tellg());
    const std::uint64_t stride = meta_.snapshot_len * k_bytes_per_sample;
    if (bytes % stride != 0)
        throw std::runtime_error("IQ file " + iq_path.string() +
                                 " is not a whole number of snapshots");
    count_ = std::size_t(bytes / stride);
}

IQSnapshot IQReader::read(std::size_t index) {
    if (index >= count_)
        throw std::out_of_range("IQ read: snapshot " + std::to_string(index) +
                                " of " + std::to_string(count_));
    const std::uint64_t stride = meta_.snapshot_len * k_bytes_per_sample;
    in_.seekg(std::streamoff(index * stride));
    IQSnapshot snap;
    snap.samples.resize(meta_.snapshot_len);
    in_.read(reinterpret_cast<char*>(snap.samples.data()),
             std::streamsize(stride));
    if (!in_)
        throw std::runtime_error("IQ read failed: " + path_.string());
    snap.sample_rate_hz = meta_.sample_rate_hz;
    snap.center_freq_hz = meta_.center_freq_hz;
    snap.time_ns = meta_.start_time_ns +
                   std::llround(double(index) * meta_.snapshot_period_ms * 1e6);
    return snap;
}

}  // namespace skysounder::iqfile
