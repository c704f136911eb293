#pragma once

#include <span>

#include "tgrasp/pipeline.hpp"

namespace tgrasp::kernels {

// Per-taxel smoothing + moving variance over a whole frame sequence.
// Every taxel row is independent, so the parallel kernel splits rows across
// OpenMP threads. The serial version is the reference the tests and the
// benchmark compare against; both must agree bit for bit.

TaxelMatrix variance_matrix_serial(std::span<const TaxelFrame> frames, std::size_t smoothing_window,
                                   std::size_t variance_window);

TaxelMatrix variance_matrix_parallel(std::span<const TaxelFrame> frames,
                                     std::size_t smoothing_window, std::size_t variance_window);

/// Smooth then take moving variance of one series, writing into out.
void smoothed_variance_row(std::span<const double> series, std::size_t smoothing_window,
                           std::size_t variance_window, std::span<double> out);

}  // namespace tgrasp::kernels
