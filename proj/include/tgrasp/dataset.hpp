#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tgrasp/core.hpp"

namespace tgrasp {

// TGD v1 on-disk dataset.
//
// <name>      text manifest, one directive per line:
//               TGD 1
//               frame_interval_ms <int>
//               layout 24 16 4 6
//               payload <file name, relative to the manifest>
//               payload_bytes <int>
//               payload_crc32 <8 hex digits>
//               recordings <count>
//               param <key> <value>                (zero or more)
//               recording <id> frames=<n> label=<state|none> phases=<a>,<g>,<h>,<r>
//               meta <key> <value>                 (zero or more, per recording)
//               end
// <name>.bin  payload: for every frame of every recording in manifest order,
//             int64 timestamp_ms followed by 384 float32 values in row-major
//             24x16 order. Everything little-endian.

inline constexpr int kDatasetVersion = 1;
inline constexpr std::size_t kFrameRecordBytes = 8 + 4 * kTaxels;

struct Dataset {
  std::int64_t frame_interval_ms = kFrameIntervalMs;
  /// Dataset-level provenance (generator ranges, seed, ...).
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<GraspRecording> recordings;
  /// CRC-32 of the payload, as read or written.
  std::uint32_t payload_crc32 = 0;
};

std::filesystem::path payload_path_for(const std::filesystem::path& manifest);

/// Writes manifest + payload. Returns the payload CRC-32.
std::uint32_t write_dataset(const std::filesystem::path& manifest,
                            std::span<const GraspRecording> recordings,
                            std::span<const std::pair<std::string, std::string>> params = {},
                            std::int64_t frame_interval_ms = kFrameIntervalMs);

Dataset read_dataset(const std::filesystem::path& manifest);

/// Serialize a recording list's frames exactly as the payload stores them.
std::vector<std::uint8_t> encode_payload(std::span<const GraspRecording> recordings);

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

/// "%08x" rendering used by the manifest and reports.
std::string crc_hex(std::uint32_t crc);

}  // namespace tgrasp
