#include "tgrasp/pipeline.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>

#include "tgrasp/errors.hpp"
#include "tgrasp/kernels.hpp"

namespace tgrasp {

void PipelineConfig::validate() const {
  if (smoothing_window < 1) throw ConfigError("smoothing_window must be >= 1");
  if (variance_window < 2) throw ConfigError("variance_window must be >= 2");
  if (!(onset_threshold > 0.0)) throw ConfigError("onset_threshold must be > 0");
  if (frame_interval_ms <= 0) throw ConfigError("frame_interval_ms must be > 0");
}

FrameSpan analysis_span(const PhaseMarks& phases, std::size_t frame_count) {
  const std::size_t end = std::min(std::max(phases.release, phases.approach + 1), frame_count);
  return {phases.approach, end};
}

RollingMean::RollingMean(std::size_t window) : ring_(window, 0.0) {
  if (window < 1) throw ConfigError("moving average window must be >= 1");
}

double RollingMean::push(double x) {
  ring_[head_] = x;
  head_ = (head_ + 1) % ring_.size();
  count_ = std::min(count_ + 1, ring_.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < count_; ++i) sum += ring_[i];
  return sum / static_cast<double>(count_);
}

void RollingMean::reset() {
  std::fill(ring_.begin(), ring_.end(), 0.0);
  head_ = count_ = 0;
}

RollingVariance::RollingVariance(std::size_t window) : ring_(window, 0.0) {
  if (window < 2) throw ConfigError("moving variance window must be >= 2");
}

double RollingVariance::push(double x) {
  ring_[head_] = x;
  head_ = (head_ + 1) % ring_.size();
  count_ = std::min(count_ + 1, ring_.size());
  const double n = static_cast<double>(count_);
  double sum = 0.0;
  for (std::size_t i = 0; i < count_; ++i) sum += ring_[i];
  const double mean = sum / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < count_; ++i) {
    const double d = ring_[i] - mean;
    ss += d * d;
  }
  return ss / n;
}

void RollingVariance::reset() {
  std::fill(ring_.begin(), ring_.end(), 0.0);
  head_ = count_ = 0;
}

std::vector<double> moving_average(std::span<const double> series, std::size_t window) {
  RollingMean m(window);
  std::vector<double> out;
  out.reserve(series.size());
  for (double x : series) out.push_back(m.push(x));
  return out;
}

std::vector<double> moving_variance(std::span<const double> series, std::size_t window) {
  RollingVariance v(window);
  std::vector<double> out;
  out.reserve(series.size());
  for (double x : series) out.push_back(v.push(x));
  return out;
}

TaxelMatrix reshape_stream(std::span<const TaxelFrame> frames) {
  if (frames.empty()) throw StructuralError("reshape_stream: empty frame sequence");
  TaxelMatrix m(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    for (std::size_t r = 0; r < kTaxels; ++r) {
      m.at(r, t) = frames[t].values[layout::frame_index_of_taxel_row(r)];
    }
  }
  return m;
}

std::vector<TaxelFrame> unreshape_stream(const TaxelMatrix& m,
                                         std::span<const std::int64_t> timestamps) {
  if (!timestamps.empty() && timestamps.size() != m.frames) {
    throw StructuralError("unreshape_stream: timestamp count mismatch");
  }
  std::vector<TaxelFrame> out(m.frames);
  for (std::size_t t = 0; t < m.frames; ++t) {
    out[t].timestamp_ms =
        timestamps.empty() ? static_cast<std::int64_t>(t) * kFrameIntervalMs : timestamps[t];
    for (std::size_t r = 0; r < kTaxels; ++r) {
      out[t].values[layout::frame_index_of_taxel_row(r)] = static_cast<float>(m.at(r, t));
    }
  }
  return out;
}

std::array<double, kFingers> per_finger_max_variance(const TaxelMatrix& variance, FrameSpan span) {
  if (span.empty()) throw ArgumentError("per_finger_max_variance: empty phase range");
  if (span.end > variance.frames) throw ArgumentError("per_finger_max_variance: range beyond t");
  std::array<double, kFingers> out{};
  for (std::size_t f = 0; f < kFingers; ++f) {
    double best = 0.0;
    for (std::size_t r = f * kTaxelsPerFinger; r < (f + 1) * kTaxelsPerFinger; ++r) {
      const auto row = variance.row(r);
      for (std::size_t t = span.begin; t < span.end; ++t) best = std::max(best, row[t]);
    }
    out[f] = best;
  }
  return out;
}

std::array<std::vector<double>, kFingers> finger_max_series(const TaxelMatrix& variance) {
  std::array<std::vector<double>, kFingers> out;
  for (std::size_t f = 0; f < kFingers; ++f) {
    auto& s = out[f];
    s.assign(variance.frames, 0.0);
    for (std::size_t r = f * kTaxelsPerFinger; r < (f + 1) * kTaxelsPerFinger; ++r) {
      const auto row = variance.row(r);
      for (std::size_t t = 0; t < variance.frames; ++t) s[t] = std::max(s[t], row[t]);
    }
  }
  return out;
}

std::optional<std::size_t> onset_time(std::span<const double> series, double threshold,
                                      std::optional<FrameSpan> search) {
  if (!(threshold > 0.0)) throw ArgumentError("onset_time: threshold must be > 0");
  const FrameSpan s = search.value_or(FrameSpan{0, series.size()});
  const std::size_t end = std::min(s.end, series.size());
  for (std::size_t t = s.begin; t < end; ++t) {
    if (series[t] > threshold) return t;
  }
  return std::nullopt;
}

std::vector<SpectrumBin> power_spectrum(std::span<const double> series, double frame_interval_ms) {
  const std::size_t n = series.size();
  if (n < 2) throw ArgumentError("power_spectrum: need at least 2 samples");
  if (!(frame_interval_ms > 0.0)) throw ArgumentError("power_spectrum: frame interval must be > 0");

  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);

  std::vector<double> in(n);
  for (std::size_t i = 0; i < n; ++i) in[i] = series[i] - mean;
  const std::size_t bins = n / 2 + 1;
  std::unique_ptr<fftw_complex, decltype(&fftw_free)> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)), &fftw_free);

  // FFTW planning is not thread-safe.
  fftw_plan plan;
#pragma omp critical(tgrasp_fftw_plan)
  plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out.get(), FFTW_ESTIMATE);
  fftw_execute(plan);
#pragma omp critical(tgrasp_fftw_plan)
  fftw_destroy_plan(plan);

  const double fs = 1000.0 / frame_interval_ms;
  const double dn = static_cast<double>(n);
  std::vector<SpectrumBin> result(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double re = out.get()[k][0];
    const double im = out.get()[k][1];
    const bool single = k == 0 || (n % 2 == 0 && k == n / 2);
    result[k].frequency_hz = static_cast<double>(k) * fs / dn;
    result[k].power = (single ? 1.0 : 2.0) * (re * re + im * im) / dn;
  }
  return result;
}

PipelineFeatures compute_features(std::span<const TaxelFrame> frames, const PipelineConfig& cfg,
                                  FrameSpan span) {
  cfg.validate();
  PipelineFeatures f;
  f.variance = kernels::variance_matrix_parallel(frames, cfg.smoothing_window, cfg.variance_window);
  f.span = span;
  f.per_finger_max = per_finger_max_variance(f.variance, span);
  f.finger_series = finger_max_series(f.variance);
  for (std::size_t i = 0; i < kFingers; ++i) {
    f.onset_times[i] = onset_time(f.finger_series[i], cfg.onset_threshold, span);
  }
  return f;
}

PipelineFeatures compute_features(const GraspRecording& rec, const PipelineConfig& cfg) {
  validate_recording(rec);
  return compute_features(rec.frames, cfg, analysis_span(rec.phases, rec.frames.size()));
}

TaxelPipeline::TaxelPipeline(PipelineConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  smoothers_.assign(kTaxels, RollingMean(cfg_.smoothing_window));
  variances_.assign(kTaxels, RollingVariance(cfg_.variance_window));
}

void TaxelPipeline::push(const TaxelFrame& frame) {
  auto& col = columns_.emplace_back();
  latest_.fill(0.0);
  for (std::size_t r = 0; r < kTaxels; ++r) {
    const double v = frame.values[layout::frame_index_of_taxel_row(r)];
    col[r] = variances_[r].push(smoothers_[r].push(v));
    auto& m = latest_[layout::finger_of_taxel_row(r)];
    m = std::max(m, col[r]);
  }
}

PipelineFeatures TaxelPipeline::snapshot(FrameSpan span) const {
  if (columns_.empty()) throw ArgumentError("pipeline snapshot: no frames pushed");
  PipelineFeatures f;
  f.variance = TaxelMatrix(columns_.size());
  for (std::size_t t = 0; t < columns_.size(); ++t) {
    for (std::size_t r = 0; r < kTaxels; ++r) f.variance.at(r, t) = columns_[t][r];
  }
  f.span = span;
  f.per_finger_max = per_finger_max_variance(f.variance, span);
  f.finger_series = finger_max_series(f.variance);
  for (std::size_t i = 0; i < kFingers; ++i) {
    f.onset_times[i] = onset_time(f.finger_series[i], cfg_.onset_threshold, span);
  }
  return f;
}

void TaxelPipeline::reset() {
  for (auto& s : smoothers_) s.reset();
  for (auto& v : variances_) v.reset();
  columns_.clear();
  latest_.fill(0.0);
}

}  // namespace tgrasp
