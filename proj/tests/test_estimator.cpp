#include <doctest.h>

#include <random>

#include "tgrasp/errors.hpp"
#include "tgrasp/estimator.hpp"
#include "tgrasp/simulator.hpp"

using namespace tgrasp;

namespace {

EstimatorConfig cfg(double t_null, std::size_t dt, double r) {
  EstimatorConfig c;
  c.t_null = c.t_onset = t_null;
  c.dt_obstruct = dt;
  c.r_branch = r;
  return c;
}

DecisionInputs inputs(std::array<double, 4> pf, std::array<std::optional<std::size_t>, 4> on = {5, 5, 5, 5}) {
  DecisionInputs in;
  in.per_finger_max = pf;
  in.onsets = on;
  return in;
}

// Step series per finger: 0 until `start`, then `level`.
FingerFeatures steps(std::array<double, 4> level, std::array<std::size_t, 4> start, std::size_t n = 30) {
  FingerFeatures f;
  f.span = {0, n};
  for (std::size_t k = 0; k < 4; ++k) {
    f.finger_series[k].assign(n, 0.0);
    for (std::size_t t = start[k]; t < n; ++t) f.finger_series[k][t] = level[k];
    f.per_finger_max[k] = start[k] < n ? level[k] : 0.0;
  }
  return f;
}

}  // namespace

TEST_CASE("decide: examples") {
  const auto shipped = EstimatorConfig::shipped();
  CHECK(decide(inputs({0.001, 0.002, 0.001, 0.001}), shipped).state == GraspState::null());

  auto c = cfg(1e-3, 10, 3.0);
  auto d = decide(inputs({0.2, 0.2, 0.2, 0.2}, {5, 6, 30, 6}), c);
  CHECK(d.state == GraspState::obstructed(0));
  CHECK(d.rule == DecisionRule::OnsetSpread);
  CHECK(d.onset_spread == 25u);

  d = decide(inputs({0.1, 0.1, 0.45, 0.1}), c);
  CHECK(d.state == GraspState::branch(2));
  CHECK(d.branch_ratio == doctest::Approx(4.5));

  CHECK(decide(inputs({0.1, 0.12, 0.11, 0.1}), c).state == GraspState::good());
}

TEST_CASE("decide: missing onset is an obstruction by the earliest finger") {
  const auto c = cfg(1e-3, 10, 3.0);
  const auto d = decide(inputs({0.2, 0.2, 0.2, 0.2}, {std::nullopt, 9, std::nullopt, 7}), c);
  CHECK(d.state == GraspState::obstructed(3));
  CHECK(d.rule == DecisionRule::MissingOnset);
}

TEST_CASE("decide: rules are checked in order") {
  const auto c = cfg(0.5, 2, 2.0);
  // Below T_null wins over a huge spread and ratio.
  CHECK(decide(inputs({0.4, 0.01, 0.01, 0.01}, {1, 20, 20, 20}), c).state == GraspState::null());
  // Spread wins over the branch ratio.
  CHECK(decide(inputs({0.9, 0.01, 0.01, 0.01}, {1, 20, 20, 20}), c).state == GraspState::obstructed(0));
  // A spread exactly at the limit is not an obstruction.
  CHECK(decide(inputs({0.9, 0.8, 0.8, 0.8}, {1, 3, 3, 3}), c).state == GraspState::good());
}

TEST_CASE("localize_branch_finger and median") {
  CHECK(localize_branch_finger({0, 0, 0, 1}) == 3);
  CHECK(localize_branch_finger({0.5, 0.5, 0.5, 0.5}) == 0);
  CHECK(localize_branch_finger({0.1, 0.7, 0.7, 0.2}) == 1);
  CHECK(median_of_others({9, 1, 3, 2}, 0) == 2);
  CHECK(median_of_others({9, 1, 3, 2}, 2) == 2);
}

TEST_CASE("decide: total over random inputs") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  std::uniform_int_distribution<int> ot(-1, 40);
  const auto c = cfg(0.02, 8, 3.0);
  for (int i = 0; i < 5000; ++i) {
    DecisionInputs in;
    for (std::size_t f = 0; f < 4; ++f) {
      in.per_finger_max[f] = u(rng);
      const int o = ot(rng);
      if (o >= 0) in.onsets[f] = static_cast<std::size_t>(o);
    }
    const auto s = decide(in, c).state;
    CHECK(s.has_finger() ==
          (s.kind() == GraspKind::BranchInterference || s.kind() == GraspKind::Obstructed));
  }
}

TEST_CASE("decide: raising the branch finger keeps the verdict") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.01, 0.3);
  const auto c = cfg(0.005, 8, 2.5);
  int checked = 0;
  for (int i = 0; i < 3000; ++i) {
    std::array<double, 4> pf{u(rng), u(rng), u(rng), u(rng)};
    const auto s = decide(inputs(pf), c).state;
    if (s.kind() != GraspKind::BranchInterference) continue;
    ++checked;
    for (double bump : {1.01, 1.5, 10.0}) {
      auto up = pf;
      up[static_cast<std::size_t>(s.finger())] *= bump;
      CHECK(decide(inputs(up), c).state == s);
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("classify is invariant under stream scaling with co-scaled thresholds") {
  BenchmarkOptions o = BenchmarkOptions::sweep(3, 0.01);
  const auto recs = generate_benchmark(99, o);
  const auto base_cfg = EstimatorConfig::shipped();
  for (double c : {0.5, 0.25}) {
    auto scaled = recs;
    for (auto& r : scaled) {
      for (auto& f : r.frames) {
        for (auto& v : f.values) v = static_cast<float>(v * c);
      }
    }
    auto sc = base_cfg;
    sc.t_null *= c * c;
    sc.t_onset *= c * c;
    const auto a = extract_features(recs, PipelineConfig{});
    const auto b = extract_features(scaled, PipelineConfig{});
    for (std::size_t i = 0; i < recs.size(); ++i) {
      CHECK(classify(a[i], base_cfg) == classify(b[i], sc));
    }
  }
}

TEST_CASE("classify rejects empty features") {
  FingerFeatures f;
  CHECK_THROWS_AS(classify(f, EstimatorConfig::shipped()), ArgumentError);
}

TEST_CASE("estimator config validation") {
  CHECK_NOTHROW(EstimatorConfig::shipped().validate());
  CHECK_THROWS_AS(EstimatorConfig{}.validate(), ConfigError);
  auto c = EstimatorConfig::shipped();
  c.dt_obstruct = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("calibrate: threshold falls between null and contact levels") {
  std::vector<FingerFeatures> feats;
  std::vector<GraspState> labels;
  for (int i = 0; i < 4; ++i) {
    feats.push_back(steps({0.01, 0.01, 0.01, 0.01}, {0, 0, 0, 0}));
    labels.push_back(GraspState::null());
    feats.push_back(steps({0.5, 0.45, 0.48, 0.5}, {5, 5, 6, 5}));
    labels.push_back(GraspState::good());
    std::array<double, 4> lv{0.1, 0.1, 0.1, 0.1};
    lv[static_cast<std::size_t>(i)] = 0.5;
    feats.push_back(steps(lv, {5, 5, 5, 5}));
    labels.push_back(GraspState::branch(i));
    std::array<std::size_t, 4> st{20, 20, 20, 20};
    st[static_cast<std::size_t>(i)] = 3;
    feats.push_back(steps({0.5, 0.5, 0.5, 0.5}, st));
    labels.push_back(GraspState::obstructed(i));
  }
  const auto res = calibrate_features(feats, labels);
  CHECK(res.config.t_null > 0.01);
  CHECK(res.config.t_null < 0.5);
  CHECK(res.macro_accuracy == 1.0);
  for (std::size_t i = 0; i < feats.size(); ++i) CHECK(classify(feats[i], res.config) == labels[i]);
}

TEST_CASE("calibrate: missing class names the absent classes") {
  std::vector<FingerFeatures> feats{steps({0.01, 0.01, 0.01, 0.01}, {0, 0, 0, 0}),
                                    steps({0.5, 0.5, 0.5, 0.5}, {5, 5, 5, 5})};
  std::vector<GraspState> labels{GraspState::null(), GraspState::good()};
  try {
    calibrate_features(feats, labels);
    FAIL("expected CalibrationError");
  } catch (const CalibrationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("branch") != std::string::npos);
    CHECK(msg.find("obstructed") != std::string::npos);
    CHECK(msg.find("good") == std::string::npos);
  }
}

TEST_CASE("calibrate: noiseless sweep is separable") {
  const auto recs = generate_benchmark(7, BenchmarkOptions::sweep(10, 0.0));
  const auto res = calibrate(recs, PipelineConfig{});
  CHECK(res.macro_accuracy == 1.0);
  const auto feats = extract_features(recs, PipelineConfig{});
  for (std::size_t i = 0; i < recs.size(); ++i) CHECK(classify(feats[i], res.config) == *recs[i].label);
}

TEST_CASE("shipped thresholds are the default benchmark calibration") {
  const auto recs = generate_benchmark(kDefaultBenchmarkSeed);
  const auto res = calibrate(recs, PipelineConfig{});
  const auto shipped = EstimatorConfig::shipped();
  CHECK(res.config.t_null == doctest::Approx(shipped.t_null).epsilon(1e-12));
  CHECK(res.config.t_onset == doctest::Approx(shipped.t_onset).epsilon(1e-12));
  CHECK(res.config.dt_obstruct == shipped.dt_obstruct);
  CHECK(res.config.r_branch == doctest::Approx(shipped.r_branch).epsilon(1e-12));
}
