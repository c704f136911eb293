#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "tgrasp/errors.hpp"
#include "tgrasp/estimator.hpp"
#include "tgrasp/kernels.hpp"
#include "tgrasp/pipeline.hpp"
#include "tgrasp/simulator.hpp"

using namespace tgrasp;

namespace {

std::vector<double> random_series(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                  double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

std::vector<TaxelFrame> random_frames(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TaxelFrame> out;
  for (std::size_t t = 0; t < n; ++t) out.push_back(testutil::random_frame(rng, static_cast<std::int64_t>(t) * 60));
  return out;
}

}  // namespace

TEST_CASE("moving_average examples") {
  const std::vector<double> ones{1, 1, 1, 1};
  CHECK(moving_average(ones, 4) == ones);
  const std::vector<double> ramp{0, 2, 4, 6};
  CHECK(moving_average(ramp, 4).back() == 3.0);
  CHECK(moving_average(std::vector<double>{}, 4).empty());
  CHECK_THROWS_AS(moving_average(ones, 0), ConfigError);
}

TEST_CASE("moving_average matches brute-force windows") {
  const auto x = random_series(1000, 21);
  const auto m = moving_average(x, 4);
  double worst = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) worst = std::max(worst, std::abs(m[t] - testutil::window_mean(x, t, 4)));
  CHECK(worst <= 1e-12);
}

TEST_CASE("moving_variance examples") {
  const auto c = moving_variance(std::vector<double>{5, 5, 5, 5}, 4);
  for (std::size_t t = 3; t < c.size(); ++t) CHECK(c[t] == 0.0);
  CHECK(moving_variance(std::vector<double>{1, 2, 3, 4}, 4)[3] == 1.25);
  CHECK(moving_variance(std::vector<double>{}, 4).empty());
  CHECK_THROWS_AS(moving_variance(std::vector<double>{1, 2}, 1), ConfigError);
}

TEST_CASE("moving_variance matches brute-force windows on a long stream") {
  const auto x = random_series(10000, 22, 0.0, 1.0);
  for (std::size_t n : {2u, 8u, 33u}) {
    const auto v = moving_variance(x, n);
    double worst = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) worst = std::max(worst, std::abs(v[t] - testutil::window_variance(x, t, n)));
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("moving_variance properties") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto x = random_series(200, seed);
    const auto v = moving_variance(x, 8);
    CHECK(std::all_of(v.begin(), v.end(), [](double d) { return d >= 0.0; }));

    std::vector<double> shifted(x), scaled(x);
    const double shift = 3.0 + static_cast<double>(seed);
    const double c = 0.1 * static_cast<double>(seed);
    for (auto& s : shifted) s += shift;
    for (auto& s : scaled) s *= c;
    const auto vs = moving_variance(shifted, 8);
    const auto vc = moving_variance(scaled, 8);
    for (std::size_t t = 0; t < x.size(); ++t) {
      CHECK(std::abs(vs[t] - v[t]) <= 1e-9);
      if (v[t] > 0.0) CHECK(std::abs(vc[t] - c * c * v[t]) <= 1e-9 * c * c * v[t]);
    }
  }
}

TEST_CASE("rolling statistics reset") {
  RollingVariance v(4);
  for (double x : {1.0, 9.0, 3.0}) v.push(x);
  v.reset();
  CHECK(v.push(7.0) == 0.0);
  RollingMean m(3);
  m.push(10.0);
  m.reset();
  CHECK(m.push(2.0) == 2.0);
}

TEST_CASE("reshape_stream") {
  TaxelFrame half;
  half.values.fill(0.5f);
  const auto one = reshape_stream(std::vector<TaxelFrame>{half});
  CHECK(one.frames == 1);
  CHECK(std::all_of(one.data.begin(), one.data.end(), [](double d) { return d == 0.5; }));

  const auto frames = random_frames(10, 31);
  const auto m = reshape_stream(frames);
  for (std::size_t row = 0; row < kRows; ++row) {
    for (std::size_t col = 0; col < kCols; ++col) {
      // Recompute the row index from the array grouping directly.
      const std::size_t finger = col / 4, array = finger * 6 + row / 4;
      const std::size_t r = array * 16 + (row % 4) * 4 + col % 4;
      for (std::size_t t = 0; t < 10; ++t) CHECK(m.at(r, t) == frames[t].at(row, col));
    }
  }
  CHECK(unreshape_stream(m) == frames);
  CHECK_THROWS_AS(reshape_stream(std::vector<TaxelFrame>{}), StructuralError);
}

TEST_CASE("per_finger_max_variance") {
  TaxelMatrix z(5);
  CHECK(per_finger_max_variance(z, {0, 5}) == std::array<double, 4>{0, 0, 0, 0});
  z.at(2 * kTaxelsPerFinger + 17, 3) = 0.9;
  CHECK(per_finger_max_variance(z, {0, 5}) == std::array<double, 4>{0, 0, 0.9, 0});
  CHECK(per_finger_max_variance(z, {0, 3}) == std::array<double, 4>{0, 0, 0, 0});
  CHECK_THROWS_AS(per_finger_max_variance(z, {2, 2}), ArgumentError);
  CHECK_THROWS_AS(per_finger_max_variance(z, {0, 6}), ArgumentError);
}

TEST_CASE("per_finger_max_variance: branch on finger 1 wins") {
  ScenarioSpec s;
  s.scenario = GraspState::branch(1);
  s.contact_frame.fill(14);
  s.branch_patch = TaxelRect{8, 11, 4, 7};
  s.noise_sd = 0.02;
  s.seed = 77;
  const auto rec = synthesize_grasp(s);
  const auto f = compute_features(rec, PipelineConfig{});
  const auto& v = f.per_finger_max;
  CHECK(std::max_element(v.begin(), v.end()) - v.begin() == 1);
}

TEST_CASE("argmax finger survives global positive scaling") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    ScenarioSpec s;
    s.scenario = GraspState::branch(static_cast<int>(seed % 4));
    s.contact_frame.fill(14);
    const std::size_t f = seed % 4;
    s.branch_patch = TaxelRect{12, 15, f * 4, f * 4 + 3};
    s.noise_sd = 0.01;
    s.seed = seed;
    auto rec = synthesize_grasp(s);
    const auto base = compute_features(rec, PipelineConfig{}).per_finger_max;
    for (auto& fr : rec.frames) {
      for (auto& v : fr.values) v *= 0.37f;
    }
    const auto scaled = compute_features(rec, PipelineConfig{}).per_finger_max;
    CHECK(std::max_element(base.begin(), base.end()) - base.begin() ==
          std::max_element(scaled.begin(), scaled.end()) - scaled.begin());
  }
}

TEST_CASE("onset_time") {
  std::vector<double> step(30, 0.0);
  std::fill(step.begin() + 10, step.end(), 1.0);
  CHECK(onset_time(step, 0.5) == 10u);
  CHECK(onset_time(std::vector<double>(30, 0.0), 0.5) == std::nullopt);
  CHECK(onset_time(step, 0.5, FrameSpan{12, 20}) == 12u);
  CHECK(onset_time(step, 0.5, FrameSpan{0, 10}) == std::nullopt);
  CHECK_THROWS_AS(onset_time(step, 0.0), ArgumentError);
}

TEST_CASE("onset of a noisy obstructed grasp tracks the noiseless onset") {
  const double t = EstimatorConfig::shipped().t_onset;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    ScenarioSpec s;
    const auto finger = static_cast<std::size_t>(seed % 4);
    s.scenario = GraspState::obstructed(static_cast<int>(finger));
    s.contact_frame[finger] = 13;
    for (std::size_t g = 0; g < 4; ++g) {
      if (g != finger) s.contact_frame[g] = 13 + 16 + seed % 3;
    }
    const auto clean = compute_features(synthesize_grasp(s), PipelineConfig{});
    const auto ref = onset_time(clean.finger_series[finger], t, clean.span);
    REQUIRE(ref.has_value());
    // Crossing happens on the contact ramp, widened by the smoothing window.
    CHECK(*ref >= 13u);
    CHECK(*ref < 13u + static_cast<std::size_t>(s.rise_frames[finger]) + 4u);

    s.noise_sd = 0.02;
    s.seed = 1000 + seed;
    const auto f = compute_features(synthesize_grasp(s), PipelineConfig{});
    const auto onset = onset_time(f.finger_series[finger], t, f.span);
    REQUIRE(onset.has_value());
    CHECK(std::abs(static_cast<long>(*onset) - static_cast<long>(*ref)) <= 2);
  }
}

TEST_CASE("power_spectrum") {
  const auto flat = power_spectrum(std::vector<double>(64, 3.0));
  CHECK(flat.size() == 33);
  for (const auto& b : flat) CHECK(b.power == doctest::Approx(0.0).epsilon(1e-20));

  const std::size_t n = 64, k = 5;
  std::vector<double> sine(n);
  for (std::size_t i = 0; i < n; ++i) sine[i] = std::sin(2.0 * std::numbers::pi * k * i / n);
  const auto sp = power_spectrum(sine, 60.0);
  const auto peak = std::max_element(sp.begin(), sp.end(), [](auto& a, auto& b) { return a.power < b.power; });
  CHECK(peak - sp.begin() == static_cast<long>(k));
  CHECK(peak->frequency_hz == doctest::Approx(k * (1000.0 / 60.0) / n));
  double rest = 0.0;
  for (std::size_t i = 0; i < sp.size(); ++i) {
    if (i != k) rest += sp[i].power;
  }
  CHECK(rest < 1e-12 * peak->power);

  for (std::size_t len : {2u, 17u, 100u}) {
    const auto x = random_series(len, 40 + len);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(len);
    double energy = 0.0;
    for (double v : x) energy += (v - mean) * (v - mean);
    double total = 0.0;
    for (const auto& b : power_spectrum(x)) total += b.power;
    CHECK(total == doctest::Approx(energy).epsilon(1e-10));
  }
  CHECK_THROWS_AS(power_spectrum(std::vector<double>{1.0}), ArgumentError);
}

TEST_CASE("variance kernels: serial, parallel and streaming agree exactly") {
  const auto frames = random_frames(80, 51);
  const auto serial = kernels::variance_matrix_serial(frames, 4, 8);
  const auto parallel = kernels::variance_matrix_parallel(frames, 4, 8);
  CHECK(serial.data == parallel.data);

  TaxelPipeline p;
  for (const auto& f : frames) p.push(f);
  const FrameSpan span{0, 60};
  const auto stream = p.snapshot(span);
  const auto batch = compute_features(frames, PipelineConfig{}, span);
  CHECK(stream.variance.data == batch.variance.data);
  CHECK(stream.per_finger_max == batch.per_finger_max);
  CHECK(stream.onset_times == batch.onset_times);
  CHECK(stream.finger_series == batch.finger_series);

  std::array<double, kFingers> last{};
  for (std::size_t f = 0; f < kFingers; ++f) last[f] = batch.finger_series[f].back();
  CHECK(p.latest_finger_max() == last);

  // Each row equals smoothing followed by the windowed variance definition.
  for (std::size_t r : {0u, 95u, 200u, 383u}) {
    std::vector<double> x;
    for (const auto& f : frames) x.push_back(f.values[layout::frame_index_of_taxel_row(r)]);
    std::vector<double> sm(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) sm[t] = testutil::window_mean(x, t, 4);
    for (std::size_t t = 0; t < x.size(); ++t) {
      CHECK(std::abs(serial.at(r, t) - testutil::window_variance(sm, t, 8)) <= 1e-12);
    }
  }

  p.reset();
  CHECK(p.frame_count() == 0);
}

TEST_CASE("pipeline config validation") {
  PipelineConfig c;
  c.variance_window = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.onset_threshold = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(TaxelPipeline{c}, ConfigError);
}

TEST_CASE("analysis_span stops before release") {
  CHECK(analysis_span({0, 12, 34, 52}, 72).end == 52);
  CHECK(analysis_span({3, 12, 34, 52}, 72).begin == 3);
}
