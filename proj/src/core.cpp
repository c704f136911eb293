#include "tgrasp/core.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "tgrasp/errors.hpp"

namespace tgrasp {

namespace layout {

ColumnSpan finger_columns(std::size_t finger) {
  if (finger >= kFingers) {
    throw ArgumentError("finger index " + std::to_string(finger) + " out of range 0..3");
  }
  return {finger * kFingerCols, finger * kFingerCols + kFingerCols - 1};
}

}  // namespace layout

namespace {

void check_finger(int finger) {
  if (finger < 0 || finger >= static_cast<int>(kFingers)) {
    throw ArgumentError("finger index " + std::to_string(finger) + " out of range 0..3");
  }
}

}  // namespace

GraspState GraspState::branch(int finger) {
  check_finger(finger);
  return GraspState(GraspKind::BranchInterference, finger);
}

GraspState GraspState::obstructed(int finger) {
  check_finger(finger);
  return GraspState(GraspKind::Obstructed, finger);
}

std::string_view kind_name(GraspKind kind) {
  switch (kind) {
    case GraspKind::Null: return "null";
    case GraspKind::Good: return "good";
    case GraspKind::BranchInterference: return "branch";
    case GraspKind::Obstructed: return "obstructed";
  }
  return "?";
}

GraspKind parse_kind(std::string_view name) {
  if (name == "null") return GraspKind::Null;
  if (name == "good") return GraspKind::Good;
  if (name == "branch") return GraspKind::BranchInterference;
  if (name == "obstructed") return GraspKind::Obstructed;
  throw FormatError("unknown grasp state '" + std::string(name) + "'");
}

std::string GraspState::to_string() const {
  std::string out(kind_name(kind_));
  if (has_finger()) {
    out += ':';
    out += std::to_string(finger_);
  }
  return out;
}

GraspState GraspState::parse(std::string_view text) {
  const auto colon = text.find(':');
  const GraspKind kind = parse_kind(text.substr(0, colon));
  const bool fingered = kind == GraspKind::BranchInterference || kind == GraspKind::Obstructed;
  if (colon == std::string_view::npos) {
    if (fingered) throw FormatError("state '" + std::string(text) + "' requires a finger");
    return kind == GraspKind::Null ? null() : good();
  }
  if (!fingered) throw FormatError("state '" + std::string(text) + "' takes no finger");
  const auto digits = text.substr(colon + 1);
  int finger = -1;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), finger);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || finger < 0 ||
      finger >= static_cast<int>(kFingers)) {
    throw FormatError("bad finger in state '" + std::string(text) + "'");
  }
  return kind == GraspKind::BranchInterference ? branch(finger) : obstructed(finger);
}

void validate_recording(const GraspRecording& rec) {
  const auto n = rec.frames.size();
  const auto& p = rec.phases;
  if (!(p.approach <= p.grasp && p.grasp <= p.hold && p.hold <= p.release)) {
    throw StructuralError("recording '" + rec.id + "': phase marks out of order");
  }
  if (n == 0 || p.release >= n) {
    throw StructuralError("recording '" + rec.id + "': phase index beyond frame count");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (rec.frames[i].timestamp_ms <= rec.frames[i - 1].timestamp_ms) {
      throw StructuralError("recording '" + rec.id + "': timestamps not increasing at frame " +
                            std::to_string(i));
    }
  }
}

TaxelFrame normalize_frame(const RawGrid& raw, const CalibrationProfile& cal,
                           std::int64_t timestamp_ms) {
  if (raw.rows != kRows || raw.cols != kCols || raw.data.size() != kTaxels) {
    throw StructuralError("raw grid is " + std::to_string(raw.rows) + "x" +
                          std::to_string(raw.cols) + ", expected 24x16");
  }
  if (cal.baseline.size() != kTaxels) {
    throw CalibrationError("calibration baseline must have 384 entries");
  }

  double global_base = 0.0;
  if (cal.mode == NormalizationMode::Global) {
    global_base = std::accumulate(cal.baseline.begin(), cal.baseline.end(), 0.0) /
                  static_cast<double>(kTaxels);
  }

  TaxelFrame out;
  out.timestamp_ms = timestamp_ms;
  for (std::size_t i = 0; i < kTaxels; ++i) {
    const double base = cal.mode == NormalizationMode::PerTaxel ? cal.baseline[i] : global_base;
    if (!(cal.full_scale > cal.baseline[i])) {
      throw CalibrationError("full_scale does not exceed baseline at taxel " + std::to_string(i));
    }
    const double v = (raw.data[i] - base) / (cal.full_scale - base);
    out.values[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

FingerImage finger_slice(const TaxelFrame& frame, int finger) {
  check_finger(finger);
  FingerImage img{};
  const std::size_t c0 = static_cast<std::size_t>(finger) * kFingerCols;
  for (std::size_t r = 0; r < kRows; ++r) {
    for (std::size_t c = 0; c < kFingerCols; ++c) {
      img[r * kFingerCols + c] = frame.at(r, c0 + c);
    }
  }
  return img;
}

TaxelFrame join_fingers(const std::array<FingerImage, kFingers>& slices,
                        std::int64_t timestamp_ms) {
  TaxelFrame out;
  out.timestamp_ms = timestamp_ms;
  for (std::size_t f = 0; f < kFingers; ++f) {
    for (std::size_t r = 0; r < kRows; ++r) {
      for (std::size_t c = 0; c < kFingerCols; ++c) {
        out.at(r, f * kFingerCols + c) = slices[f][r * kFingerCols + c];
      }
    }
  }
  return out;
}

}  // namespace tgrasp
