#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tgrasp {

// Frame geometry. Each finger carries 6 arrays of 4x4 taxels stacked along
// its length; the four fingers sit side by side as 24x4 strips.
inline constexpr std::size_t kRows = 24;
inline constexpr std::size_t kCols = 16;
inline constexpr std::size_t kTaxels = kRows * kCols;  // 384
inline constexpr std::size_t kFingers = 4;
inline constexpr std::size_t kArraysPerFinger = 6;
inline constexpr std::size_t kArraySide = 4;
inline constexpr std::size_t kTaxelsPerArray = kArraySide * kArraySide;  // 16
inline constexpr std::size_t kFingerCols = kCols / kFingers;             // 4
inline constexpr std::size_t kTaxelsPerFinger = kRows * kFingerCols;     // 96
inline constexpr std::int64_t kFrameIntervalMs = 60;

using FrameValues = std::array<float, kTaxels>;      // row-major 24x16
using FingerImage = std::array<float, kTaxelsPerFinger>;  // row-major 24x4

/// One normalized 24x16 pressure snapshot.
struct TaxelFrame {
  std::int64_t timestamp_ms = 0;
  FrameValues values{};

  float at(std::size_t row, std::size_t col) const { return values[row * kCols + col]; }
  float& at(std::size_t row, std::size_t col) { return values[row * kCols + col]; }

  bool operator==(const TaxelFrame&) const = default;
};

/// Column span [first, last] owned by a finger.
struct ColumnSpan {
  std::size_t first;
  std::size_t last;
};

namespace layout {

ColumnSpan finger_columns(std::size_t finger);

/// Finger that owns a frame column.
constexpr std::size_t finger_of_column(std::size_t col) { return col / kFingerCols; }

/// Row of the reshaped 384xT matrix holding frame taxel (row, col).
/// Rows are grouped by sensor array: r = 16 * array + taxel-in-array, where
/// arrays are numbered finger-major (finger * 6 + position along finger).
/// Finger f therefore owns the contiguous rows [96 f, 96 f + 96).
constexpr std::size_t taxel_row(std::size_t row, std::size_t col) {
  const std::size_t finger = col / kFingerCols;
  const std::size_t array = finger * kArraysPerFinger + row / kArraySide;
  const std::size_t local = (row % kArraySide) * kArraySide + (col % kFingerCols);
  return array * kTaxelsPerArray + local;
}

/// Inverse of taxel_row: the row-major frame index for reshaped row r.
constexpr std::size_t frame_index_of_taxel_row(std::size_t r) {
  const std::size_t array = r / kTaxelsPerArray;
  const std::size_t local = r % kTaxelsPerArray;
  const std::size_t finger = array / kArraysPerFinger;
  const std::size_t row = (array % kArraysPerFinger) * kArraySide + local / kArraySide;
  const std::size_t col = finger * kFingerCols + local % kArraySide;
  return row * kCols + col;
}

constexpr std::size_t finger_of_taxel_row(std::size_t r) { return r / kTaxelsPerFinger; }

}  // namespace layout

enum class GraspKind : std::uint8_t { Null = 0, Good = 1, BranchInterference = 2, Obstructed = 3 };

inline constexpr std::size_t kGraspKinds = 4;

/// Grasp classification. Branch and obstructed states carry a finger index.
class GraspState {
 public:
  static GraspState null() { return GraspState(GraspKind::Null, -1); }
  static GraspState good() { return GraspState(GraspKind::Good, -1); }
  static GraspState branch(int finger);
  static GraspState obstructed(int finger);

  GraspKind kind() const { return kind_; }
  bool has_finger() const { return finger_ >= 0; }
  /// Finger payload; only meaningful when has_finger().
  int finger() const { return finger_; }

  bool operator==(const GraspState&) const = default;

  /// "null", "good", "branch:2", "obstructed:0".
  std::string to_string() const;
  static GraspState parse(std::string_view text);

 private:
  GraspState(GraspKind kind, int finger) : kind_(kind), finger_(finger) {}
  GraspKind kind_;
  int finger_;
};

std::string_view kind_name(GraspKind kind);
GraspKind parse_kind(std::string_view name);

/// Start frame of each grasp phase.
struct PhaseMarks {
  std::size_t approach = 0;
  std::size_t grasp = 0;
  std::size_t hold = 0;
  std::size_t release = 0;

  bool operator==(const PhaseMarks&) const = default;
};

struct GraspRecording {
  std::string id;
  std::vector<TaxelFrame> frames;
  PhaseMarks phases;
  std::optional<GraspState> label;
  /// Scenario parameters used by the simulator; empty for external data.
  std::map<std::string, std::string> meta;

  bool operator==(const GraspRecording&) const = default;
};

/// Throws StructuralError when frame/phase invariants do not hold.
void validate_recording(const GraspRecording& rec);

enum class NormalizationMode { PerTaxel, Global };

/// Raw reading of a rest (unloaded) sensor per taxel, and the raw reading
/// that corresponds to the 20 N top of the detectable band.
struct CalibrationProfile {
  std::vector<double> baseline = std::vector<double>(kTaxels, 0.0);
  double full_scale = 1.0;
  NormalizationMode mode = NormalizationMode::PerTaxel;

  /// baseline 0, full_scale 1.
  static CalibrationProfile identity() { return {}; }
};

/// A raw 2-D reading of arbitrary reported shape; normalize_frame checks it.
struct RawGrid {
  std::size_t rows = kRows;
  std::size_t cols = kCols;
  std::vector<double> data;  // row-major
};

TaxelFrame normalize_frame(const RawGrid& raw, const CalibrationProfile& cal,
                           std::int64_t timestamp_ms = 0);

FingerImage finger_slice(const TaxelFrame& frame, int finger);

/// Column-wise concatenation of four finger slices back into a frame.
TaxelFrame join_fingers(const std::array<FingerImage, kFingers>& slices,
                        std::int64_t timestamp_ms = 0);

}  // namespace tgrasp
