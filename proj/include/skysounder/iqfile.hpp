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
#include <fstream>
#include <vector>

#include "skysounder/common.hpp"
#include "skysounder/sounder.hpp"
#include "skysounder/waveform.hpp"

namespace skysounder::iqfile {

// Capture metadata stored in the JSON sidecar next to the sample file.
// Snapshot timestamps are start_time_ns + index * snapshot_period_ms.
struct IQFileMeta {
    double sample_rate_hz = 50e6;
    double center_freq_hz = 3.5e9;
    std::size_t snapshot_len = 81900;
    double snapshot_period_ms = 100.0;
    std::int64_t start_time_ns = 0;
    waveform::MSequenceSpec sequence;
    int repeats = 20;
};

// Sidecar lives next to the sample file as "<file>.json".
std::filesystem::path sidecar_path(const std::filesystem::path& iq_path);

// Rebuilds the sounding frame described by the sidecar. The per-chip
// oversampling follows from snapshot_len = length * repeats * per_chip.
// Throws std::invalid_argument when the fields are inconsistent.
waveform::SoundingFrame frame_from_meta(const IQFileMeta& meta);

// Appends fixed-length snapshots to a little-endian interleaved float32
// container (I then Q per sample). The sidecar is written on construction.
class IQWriter {
  public:
    IQWriter(const std::filesystem::path& iq_path, const IQFileMeta& meta);

    // samples.size() must equal the sidecar snapshot_len.
    void append(const std::vector<cxf>& samples);

    std::size_t count() const { return count_; }
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t snapshot_len_;
    std::size_t count_ = 0;
};

// Random-access reader over the same container. The fixed snapshot stride
// makes every read a single seek.
class IQReader {
  public:
    explicit IQReader(const std::filesystem::path& iq_path);

    const IQFileMeta& meta() const { return meta_; }
    std::size_t snapshot_count() const { return count_; }

    // Timestamped snapshot at `index`; throws std::out_of_range past the end.
    IQSnapshot read(std::size_t index);

  private:
    std::filesystem::path path_;
    std::ifstream in_;
    IQFileMeta meta_;
    std::size_t count_ = 0;
};

}  // namespace skysounder::iqfile
