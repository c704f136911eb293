#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tgrasp/core.hpp"
#include "tgrasp/pipeline.hpp"

namespace tgrasp {

/// Thresholds of the moving-variance rule classifier.
struct EstimatorConfig {
  double t_null = 0.0;        // max variance below this on every finger -> Null
  double t_onset = 0.0;       // finger onset = first frame its max variance exceeds this
  std::size_t dt_obstruct = 1;  // onset spread (frames) beyond this -> Obstructed
  double r_branch = 1.0;      // finger max / median(other three) beyond this -> Branch

  /// Thresholds calibrated on the default seeded benchmark.
  static EstimatorConfig shipped();

  /// Throws ConfigError.
  void validate() const;

  bool operator==(const EstimatorConfig&) const = default;
};

/// The per-finger reductions the decision rules read.
struct FingerFeatures {
  FrameSpan span;
  std::array<double, kFingers> per_finger_max{};
  std::array<std::vector<double>, kFingers> finger_series;
};

FingerFeatures summarize(const PipelineFeatures& features);

/// Quantities the decision procedure branches on.
struct DecisionInputs {
  std::array<double, kFingers> per_finger_max{};
  std::array<std::optional<std::size_t>, kFingers> onsets{};
};

enum class DecisionRule { NullBelowThreshold, OnsetSpread, MissingOnset, BranchRatio, Default };

struct DecisionTrace {
  DecisionInputs inputs;
  GraspState state = GraspState::null();
  DecisionRule rule = DecisionRule::Default;
  double max_variance = 0.0;
  std::optional<std::size_t> onset_spread;
  int ratio_finger = 0;
  double branch_ratio = 0.0;  // per_finger_max[ratio_finger] / median(others)
};

std::string_view rule_name(DecisionRule rule);

/// Onsets recomputed from the finger series with cfg.t_onset over the span.
DecisionInputs decision_inputs(const FingerFeatures& features, const EstimatorConfig& cfg);

/// The fixed-order decision procedure: null, obstructed, branch, good.
DecisionTrace decide(const DecisionInputs& inputs, const EstimatorConfig& cfg);

/// Throws ArgumentError for features with zero frames.
GraspState classify(const FingerFeatures& features, const EstimatorConfig& cfg);
GraspState classify(const PipelineFeatures& features, const EstimatorConfig& cfg);
DecisionTrace classify_traced(const FingerFeatures& features, const EstimatorConfig& cfg);

/// argmax, ties to the lowest finger index.
int localize_branch_finger(const std::array<double, kFingers>& per_finger_max);

/// Middle value of the three fingers other than `finger`.
double median_of_others(const std::array<double, kFingers>& values, int finger);

/// Extract FingerFeatures for a batch of recordings (parallel across recordings).
std::vector<FingerFeatures> extract_features(std::span<const GraspRecording> recordings,
                                             const PipelineConfig& cfg);

struct CalibrationGrid {
  std::size_t max_null_candidates = 256;
  std::size_t dt_min = 1;
  std::size_t dt_max = 30;
  double r_base = 1.05;   // r_branch candidates are r_base^k
  std::size_t r_steps = 60;
};

struct CalibrationResult {
  EstimatorConfig config;
  double macro_accuracy = 0.0;
  std::size_t optimal_configs = 0;
  std::size_t evaluated_configs = 0;
};

/// Grid search maximizing the mean of the four per-class accuracies (branch
/// counted correct only with the right finger). T_onset is tied to T_null.
/// Among equally good configurations the median one, taken lexicographically
/// over (T_null, dt, r), is returned. Throws CalibrationError when a class is
/// missing.
CalibrationResult calibrate(std::span<const GraspRecording> labeled, const PipelineConfig& pcfg,
                            const CalibrationGrid& grid = {});

CalibrationResult calibrate_features(std::span<const FingerFeatures> features,
                                     std::span<const GraspState> labels,
                                     const CalibrationGrid& grid = {});

}  // namespace tgrasp
