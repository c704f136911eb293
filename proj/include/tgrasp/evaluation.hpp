#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tgrasp/core.hpp"
#include "tgrasp/estimator.hpp"
#include "tgrasp/pipeline.hpp"

namespace tgrasp {

/// One line of the predictions exchange file:
///   <recording_id>, <null|good|branch|obstructed>[, <finger>]
struct Prediction {
  std::string id;
  GraspKind kind = GraspKind::Null;
  std::optional<int> finger;

  bool operator==(const Prediction&) const = default;
};

Prediction prediction_of(std::string id, const GraspState& state);

/// Blank lines and lines starting with '#' are skipped. Throws FormatError.
std::vector<Prediction> parse_predictions(std::istream& in);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);
void write_predictions(std::ostream& out, std::span<const Prediction> predictions);

/// Rule-estimator predictions for every recording, in input order.
std::vector<Prediction> predict_with_rules(std::span<const GraspRecording> recordings,
                                           const PipelineConfig& pcfg, const EstimatorConfig& ecfg);

/// Detection accuracies of the conventional moving-variance method on the
/// 200-grasp hardware benchmark, printed next to ours for reference.
struct ReferenceAccuracy {
  static constexpr double null_grasp = 0.966;
  static constexpr double obstructed = 0.885;
  static constexpr double good = 0.521;
  static constexpr double branch = 0.750;
};

struct EvaluationReport {
  /// confusion[truth][predicted], indexed by GraspKind.
  std::array<std::array<std::size_t, kGraspKinds>, kGraspKinds> confusion{};
  /// Branch recordings: [true finger][predicted finger], column 4 = predicted
  /// something other than a branch with a finger.
  std::array<std::array<std::size_t, kFingers + 1>, kFingers> branch_fingers{};
  std::array<std::size_t, kGraspKinds> class_counts{};
  /// Fraction of each class predicted with the right kind.
  std::array<double, kGraspKinds> per_class_accuracy{};
  /// Branch recordings predicted as branch on the right finger.
  double localization_accuracy = 0.0;
  double overall_accuracy = 0.0;
  std::string dataset_digest;
  std::string source;

  std::size_t total() const;
  std::string to_table() const;
  std::string to_structured() const;
};

/// Throws ReconciliationError when predictions do not cover every recording
/// exactly once.
EvaluationReport evaluate(std::span<const GraspRecording> recordings,
                          std::span<const Prediction> predictions, std::string dataset_digest,
                          std::string source);

}  // namespace tgrasp
