#include "tgrasp/kernels.hpp"

#include <omp.h>

#include <vector>

#include "tgrasp/errors.hpp"

namespace tgrasp::kernels {

namespace {

void check(std::span<const TaxelFrame> frames, std::size_t smoothing, std::size_t variance) {
  if (frames.empty()) throw StructuralError("empty frame sequence");
  if (smoothing < 1) throw ConfigError("smoothing window must be >= 1");
  if (variance < 2) throw ConfigError("variance window must be >= 2");
}

void taxel_series(std::span<const TaxelFrame> frames, std::size_t row, std::vector<double>& out) {
  const std::size_t idx = layout::frame_index_of_taxel_row(row);
  out.resize(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) out[t] = frames[t].values[idx];
}

}  // namespace

void smoothed_variance_row(std::span<const double> series, std::size_t smoothing_window,
                           std::size_t variance_window, std::span<double> out) {
  RollingMean mean(smoothing_window);
  RollingVariance var(variance_window);
  for (std::size_t t = 0; t < series.size(); ++t) out[t] = var.push(mean.push(series[t]));
}

TaxelMatrix variance_matrix_serial(std::span<const TaxelFrame> frames, std::size_t smoothing_window,
                                   std::size_t variance_window) {
  check(frames, smoothing_window, variance_window);
  TaxelMatrix m(frames.size());
  std::vector<double> series;
  for (std::size_t r = 0; r < kTaxels; ++r) {
    taxel_series(frames, r, series);
    smoothed_variance_row(series, smoothing_window, variance_window, m.row(r));
  }
  return m;
}

TaxelMatrix variance_matrix_parallel(std::span<const TaxelFrame> frames,
                                     std::size_t smoothing_window, std::size_t variance_window) {
  check(frames, smoothing_window, variance_window);
  TaxelMatrix m(frames.size());
  const long rows = static_cast<long>(kTaxels);
#pragma omp parallel
  {
    std::vector<double> series;
#pragma omp for schedule(static)
    for (long r = 0; r < rows; ++r) {
      taxel_series(frames, static_cast<std::size_t>(r), series);
      smoothed_variance_row(series, smoothing_window, variance_window,
                            m.row(static_cast<std::size_t>(r)));
    }
  }
  return m;
}

}  // namespace tgrasp::kernels
