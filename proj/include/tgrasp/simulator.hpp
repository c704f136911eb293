#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <string>
#include <vector>

#include "tgrasp/core.hpp"
#include "tgrasp/ogden.hpp"

namespace tgrasp {

inline constexpr std::uint64_t kDefaultBenchmarkSeed = 20220601;

/// Normalized pressure per MPa of finger nominal stress; maps the Ogden
/// response at typical grasp stretches (1.2-1.35) to 0.3-0.4 of full scale.
inline constexpr double kStressToPressure = 0.012;

/// Inclusive taxel rectangle in frame coordinates.
struct TaxelRect {
  std::size_t row0 = 0, row1 = 0;
  std::size_t col0 = 0, col1 = 0;
};

struct ScenarioSpec {
  GraspState scenario = GraspState::null();
  std::string id = "rec";
  std::size_t frame_count = 72;
  PhaseMarks phases{0, 12, 34, 52};

  /// Frame each finger first touches something; nullopt = never.
  std::array<std::optional<std::size_t>, kFingers> contact_frame{};
  /// Peak stretch of the finger skin at full closure.
  std::array<double, kFingers> grasp_depth{1.3, 1.3, 1.3, 1.3};
  /// Fruit patch centre along the finger (row, 0 = hinge end).
  std::array<double, kFingers> patch_center_row{17.5, 17.5, 17.5, 17.5};
  double patch_half_rows = 6.0;  // spans three arrays
  double patch_half_cols = 2.5;

  /// Frames from first touch to full closure, per finger.
  std::array<double, kFingers> rise_frames{8.0, 8.0, 8.0, 8.0};
  /// Pressure multiplier per finger; above 1 models a finger pressing harder.
  std::array<double, kFingers> contact_gain{1.0, 1.0, 1.0, 1.0};
  double release_frames = 6.0;

  /// Branch ridge (branch scenarios only), must lie in the flagged finger.
  std::optional<TaxelRect> branch_patch;
  /// Ridge peak relative to the fruit patch peak on the same finger.
  double ridge_gain = 3.0;

  /// Normalized skin preload reading with nothing in contact.
  double baseline = 0.05;
  double noise_sd = 0.0;
  std::size_t leaf_blips = 0;
  /// Short snap transients of the silicone skin on random taxels.
  std::size_t skin_artifacts = 0;
  double artifact_amplitude_min = 0.2, artifact_amplitude_max = 0.8;
  /// 5 % nearest-neighbour mixing before noise.
  bool crosstalk = false;

  OgdenParams material = OgdenParams::ninjaflex();
  std::uint64_t seed = 0;

  /// Throws ArgumentError.
  void validate() const;
};

/// Deterministic for a fixed scenario (including seed).
GraspRecording synthesize_grasp(const ScenarioSpec& spec);

/// Ranges the benchmark draws nuisance parameters from.
struct BenchmarkOptions {
  std::size_t null_without_leaves = 15;
  std::size_t null_with_leaves = 15;
  std::size_t obstructed = 26;
  std::size_t good = 48;
  /// Branch and obstructed fingers cycle 0,1,2,3 in generation order.
  std::size_t branch = 96;

  double noise_sd_min = 0.01, noise_sd_max = 0.03;
  /// When set, every recording uses this noise level instead.
  std::optional<double> noise_sd_override;

  double depth_min = 1.20, depth_max = 1.35;
  double rise_min = 6.0, rise_max = 10.0;
  double ridge_gain_min = 2.0, ridge_gain_max = 4.0;
  std::size_t obstruct_lag_min = 8, obstruct_lag_max = 26;
  double obstruct_never_prob = 0.25;
  std::size_t contact_jitter = 1;  // +/- frames around the synchronized onset
  std::size_t leaf_blips_max = 4;
  /// Poisson mean of skin artifacts per contact recording.
  double skin_artifact_rate = 0.5;
  /// Chance that one finger closes faster and presses harder than the rest.
  double uneven_closure_prob = 0.65;
  double uneven_rise_min = 0.5, uneven_rise_max = 1.0;  // fraction of the nominal rise
  double uneven_gain_min = 1.4, uneven_gain_max = 3.5;
  bool crosstalk = false;

  /// Benchmark-sized class mix.
  static BenchmarkOptions table_mix() { return {}; }
  /// Equal count per class; branch and obstructed cycle through fingers.
  /// Skin artifacts and uneven closure are off and obstruction lags start at
  /// 12 frames, so the classes do not overlap.
  static BenchmarkOptions sweep(std::size_t per_class, double noise_sd);

  std::vector<std::pair<std::string, std::string>> describe() const;
};

/// Per-recording seed derived from (seed, index), so recordings can be
/// generated in any order.
std::uint64_t recording_seed(std::uint64_t seed, std::size_t index);

/// Labels in generation order for the option's class mix.
std::vector<GraspState> benchmark_labels(const BenchmarkOptions& opts);

/// Draws the scenario for recording `index`.
ScenarioSpec sample_scenario(std::uint64_t seed, std::size_t index, const BenchmarkOptions& opts);

/// 200 recordings in the 30/26/48/96 mix (OpenMP across recordings).
std::vector<GraspRecording> generate_benchmark(std::uint64_t seed,
                                               const BenchmarkOptions& opts = {});

/// Serial reference of generate_benchmark.
std::vector<GraspRecording> generate_benchmark_serial(std::uint64_t seed,
                                                      const BenchmarkOptions& opts = {});

}  // namespace tgrasp
