#pragma once

#include <string>
#include <vector>

#include "vigilkit/signal.hpp"

namespace vigilkit::io {

inline constexpr const char* kRecordingSchema = "vigilkit-eeg/1";

/// Reads a vigilkit-eeg/1 sidecar and its interleaved little-endian float32
/// payload. The payload path is the sidecar's "data_file" entry (relative to
/// the sidecar) or, when absent, the sidecar path with a ".bin" extension.
eeg::Recording read_recording(const std::string& sidecar_path);

/// Writes `<stem>.json` and `<stem>.bin`.
void write_recording(const eeg::Recording& rec, const std::string& stem);

/// Small-file import: header row of channel names, one row per sample.
eeg::Recording read_recording_csv(const std::string& path, double fs_hz,
                                  std::vector<std::string> eog_channels);

/// {"bands":[{"name":..,"lo_hz":..,"hi_hz":..}, ...]} or the bare array.
eeg::BandSet read_band_set(const std::string& path);
void write_band_set(const eeg::BandSet& bands, const std::string& path);

/// {"rois":[{"label":..,"channels":[..]}, ...]}
eeg::RoiMap read_roi_map(const std::string& path);
void write_roi_map(const eeg::RoiMap& rois, const std::string& path);

}  // namespace vigilkit::io
