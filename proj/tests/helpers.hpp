#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tgrasp/core.hpp"

namespace testutil {

inline tgrasp::TaxelFrame random_frame(std::mt19937_64& rng, std::int64_t ts = 0) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  tgrasp::TaxelFrame f;
  f.timestamp_ms = ts;
  for (auto& v : f.values) v = u(rng);
  return f;
}

inline tgrasp::GraspRecording random_recording(std::mt19937_64& rng, std::size_t frames,
                                               std::string id) {
  tgrasp::GraspRecording r;
  r.id = std::move(id);
  for (std::size_t t = 0; t < frames; ++t) {
    r.frames.push_back(random_frame(rng, static_cast<std::int64_t>(t) * 60));
  }
  r.phases = {0, frames / 4, frames / 2, frames - 1};
  return r;
}

/// Windowed population variance recomputed from scratch.
inline double window_variance(const std::vector<double>& x, std::size_t t, std::size_t n) {
  const std::size_t lo = t + 1 >= n ? t + 1 - n : 0;
  const double k = static_cast<double>(t + 1 - lo);
  double mean = 0.0;
  for (std::size_t i = lo; i <= t; ++i) mean += x[i];
  mean /= k;
  double ss = 0.0;
  for (std::size_t i = lo; i <= t; ++i) ss += (x[i] - mean) * (x[i] - mean);
  return ss / k;
}

inline double window_mean(const std::vector<double>& x, std::size_t t, std::size_t w) {
  const std::size_t lo = t + 1 >= w ? t + 1 - w : 0;
  double s = 0.0;
  for (std::size_t i = lo; i <= t; ++i) s += x[i];
  return s / static_cast<double>(t + 1 - lo);
}

// Bitwise reflected CRC-32 (polynomial 0xEDB88320).
inline std::uint32_t slow_crc32(const std::vector<std::uint8_t>& bytes) {
  std::uint32_t c = 0xFFFFFFFFu;
  for (auto b : bytes) {
    c ^= b;
    for (int k = 0; k < 8; ++k) c = (c >> 1) ^ (0xEDB88320u & (0u - (c & 1u)));
  }
  return ~c;
}

}  // namespace testutil
