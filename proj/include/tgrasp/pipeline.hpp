#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tgrasp/core.hpp"

namespace tgrasp {

struct PipelineConfig {
  std::size_t smoothing_window = 4;
  std::size_t variance_window = 8;
  /// Threshold on per-finger max variance used for the onset_times snapshot.
  double onset_threshold = 1e-3;
  std::int64_t frame_interval_ms = kFrameIntervalMs;

  /// Throws ConfigError.
  void validate() const;
};

/// Half-open frame range [begin, end).
struct FrameSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end > begin ? end - begin : 0; }
  bool empty() const { return end <= begin; }
};

/// Frames analysed for a classification: everything before the release phase.
FrameSpan analysis_span(const PhaseMarks& phases, std::size_t frame_count);

/// Trailing-window mean over the last w samples (fewer at stream start).
class RollingMean {
 public:
  explicit RollingMean(std::size_t window);
  double push(double x);
  void reset();

 private:
  std::vector<double> ring_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
};

/// Trailing-window population variance (divisor = samples in window).
/// Recomputed two-pass over the window on every push, so the streaming value
/// is exactly the windowed definition.
class RollingVariance {
 public:
  explicit RollingVariance(std::size_t window);
  double push(double x);
  void reset();

 private:
  std::vector<double> ring_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
};

std::vector<double> moving_average(std::span<const double> series, std::size_t window);

/// Throws ConfigError for window < 2.
std::vector<double> moving_variance(std::span<const double> series, std::size_t window);

/// 384 x T matrix. Row r is taxel layout::frame_index_of_taxel_row(r);
/// storage is row-major so each taxel's time series is contiguous.
struct TaxelMatrix {
  std::size_t frames = 0;
  std::vector<double> data;

  TaxelMatrix() = default;
  explicit TaxelMatrix(std::size_t t) : frames(t), data(kTaxels * t, 0.0) {}

  double at(std::size_t row, std::size_t t) const { return data[row * frames + t]; }
  double& at(std::size_t row, std::size_t t) { return data[row * frames + t]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * frames, frames}; }
  std::span<double> row(std::size_t r) { return {data.data() + r * frames, frames}; }
};

/// Throws StructuralError on an empty sequence.
TaxelMatrix reshape_stream(std::span<const TaxelFrame> frames);

/// Inverse of reshape_stream; timestamps are taken from `timestamps` when
/// given, otherwise frame index * 60 ms.
std::vector<TaxelFrame> unreshape_stream(const TaxelMatrix& m,
                                         std::span<const std::int64_t> timestamps = {});

struct PipelineFeatures {
  /// Per-taxel moving variance.
  TaxelMatrix variance;
  /// Frames the reductions were taken over.
  FrameSpan span;
  std::array<double, kFingers> per_finger_max{};
  std::array<std::optional<std::size_t>, kFingers> onset_times{};
  /// Per-frame max variance over each finger's 96 rows (all frames).
  std::array<std::vector<double>, kFingers> finger_series;

  std::size_t frame_count() const { return variance.frames; }
};

/// Max of M restricted to each finger's rows and the span's columns.
/// Throws ArgumentError for an empty or out-of-range span.
std::array<double, kFingers> per_finger_max_variance(const TaxelMatrix& variance, FrameSpan span);

/// Per-frame max over each finger's rows.
std::array<std::vector<double>, kFingers> finger_max_series(const TaxelMatrix& variance);

/// First index in `search` where series exceeds threshold.
/// Throws ArgumentError for threshold <= 0.
std::optional<std::size_t> onset_time(std::span<const double> series, double threshold,
                                      std::optional<FrameSpan> search = std::nullopt);

struct SpectrumBin {
  double frequency_hz;
  double power;
};

/// One-sided power spectrum of the mean-removed series, scaled so the bins
/// sum to the series' time-domain energy (sum of squared deviations).
/// Throws ArgumentError for fewer than 2 samples.
std::vector<SpectrumBin> power_spectrum(std::span<const double> series,
                                        double frame_interval_ms = kFrameIntervalMs);

/// Batch feature extraction over a whole frame sequence.
PipelineFeatures compute_features(std::span<const TaxelFrame> frames, const PipelineConfig& cfg,
                                  FrameSpan span);

PipelineFeatures compute_features(const GraspRecording& rec, const PipelineConfig& cfg);

/// Streaming front end: one frame in, per-taxel state updated in place.
class TaxelPipeline {
 public:
  explicit TaxelPipeline(PipelineConfig cfg = {});

  void push(const TaxelFrame& frame);
  std::size_t frame_count() const { return columns_.size(); }

  /// Per-finger max variance at the most recent frame.
  const std::array<double, kFingers>& latest_finger_max() const { return latest_; }

  /// Immutable snapshot of features over `span` of the frames seen so far.
  PipelineFeatures snapshot(FrameSpan span) const;

  void reset();

 private:
  PipelineConfig cfg_;
  std::vector<RollingMean> smoothers_;
  std::vector<RollingVariance> variances_;
  std::vector<std::array<double, kTaxels>> columns_;  // indexed by taxel row
  std::array<double, kFingers> latest_{};
};

}  // namespace tgrasp
