#include "tgrasp/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>

#include "tgrasp/errors.hpp"

namespace tgrasp {

namespace {

std::string num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Logistic ramp from 0 at `start` to ~1 after `rise` frames; exactly 0 before start.
double ramp(double t, double start, double rise) {
  if (t < start) return 0.0;
  const double k = 8.0 / rise;
  auto logistic = [&](double x) { return 1.0 / (1.0 + std::exp(-k * (x - start - 0.5 * rise))); };
  const double l0 = logistic(start);
  return (logistic(t) - l0) / (1.0 - l0);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

void ScenarioSpec::validate() const {
  const auto kind = scenario.kind();
  if (frame_count == 0) throw ArgumentError("scenario: zero frames");
  const auto& p = phases;
  if (!(p.approach <= p.grasp && p.grasp <= p.hold && p.hold <= p.release &&
        p.release < frame_count)) {
    throw ArgumentError("scenario: phase marks out of order or beyond the recording");
  }
  if (!(noise_sd >= 0.0)) throw ArgumentError("scenario: noise_sd must be >= 0");
  if (!std::all_of(rise_frames.begin(), rise_frames.end(), [](double r) { return r > 0.0; }) ||
      !(release_frames > 0.0)) {
    throw ArgumentError("scenario: rise/release frames must be > 0");
  }
  if (!(artifact_amplitude_min >= 0.0 && artifact_amplitude_min <= artifact_amplitude_max)) {
    throw ArgumentError("scenario: bad skin artifact amplitude range");
  }
  if (!(baseline >= 0.0 && baseline < 1.0)) throw ArgumentError("scenario: baseline outside [0,1)");
  material.validate();
  for (std::size_t f = 0; f < kFingers; ++f) {
    if (contact_frame[f] && *contact_frame[f] >= frame_count) {
      throw ArgumentError("scenario: contact frame beyond recording length");
    }
    if (contact_frame[f] && !(grasp_depth[f] > 1.0)) {
      throw ArgumentError("scenario: grasp depth must be a stretch > 1");
    }
    if (!(contact_gain[f] > 0.0)) throw ArgumentError("scenario: contact gain must be > 0");
  }
  const auto touching = std::count_if(contact_frame.begin(), contact_frame.end(),
                                      [](const auto& c) { return c.has_value(); });
  switch (kind) {
    case GraspKind::Null:
      if (touching != 0) throw ArgumentError("scenario: null grasp cannot have contacts");
      break;
    case GraspKind::Good:
    case GraspKind::BranchInterference:
      if (touching != static_cast<long>(kFingers)) {
        throw ArgumentError("scenario: every finger must contact the fruit");
      }
      break;
    case GraspKind::Obstructed: {
      const auto f = static_cast<std::size_t>(scenario.finger());
      if (!contact_frame[f]) throw ArgumentError("scenario: obstructed finger has no contact");
      for (std::size_t g = 0; g < kFingers; ++g) {
        if (g != f && contact_frame[g] && *contact_frame[g] <= *contact_frame[f]) {
          throw ArgumentError("scenario: obstructed finger must touch first");
        }
      }
      break;
    }
  }
  if (kind == GraspKind::BranchInterference) {
    if (!branch_patch) throw ArgumentError("scenario: branch grasp needs a branch patch");
    const auto span = layout::finger_columns(static_cast<std::size_t>(scenario.finger()));
    const auto& b = *branch_patch;
    if (b.row0 > b.row1 || b.row1 >= kRows || b.col0 > b.col1 || b.col0 < span.first ||
        b.col1 > span.last) {
      throw ArgumentError("scenario: branch patch outside the flagged finger");
    }
    if (!(ridge_gain > 0.0)) throw ArgumentError("scenario: ridge gain must be > 0");
  } else if (branch_patch) {
    throw ArgumentError("scenario: branch patch given for a non-branch grasp");
  }
}

GraspRecording synthesize_grasp(const ScenarioSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  GraspRecording rec;
  rec.id = spec.id;
  rec.label = spec.scenario;
  rec.phases = spec.phases;
  rec.frames.resize(spec.frame_count);

  struct Blip {
    std::size_t row, col, start, length;
    double amplitude;
  };
  std::vector<Blip> blips;
  for (std::size_t i = 0; i < spec.leaf_blips; ++i) {
    Blip b;
    b.row = uniform_index(rng, 0, kRows - 2);
    b.col = uniform_index(rng, 0, kCols - 2);
    const std::size_t last_start =
        std::max(spec.phases.grasp, spec.phases.release > 6 ? spec.phases.release - 6 : 0);
    b.start = uniform_index(rng, spec.phases.grasp, last_start);
    b.length = uniform_index(rng, 3, 5);
    b.amplitude = uniform_real(rng, 0.02, 0.06);
    blips.push_back(b);
  }
  std::vector<Blip> snaps;
  for (std::size_t i = 0; i < spec.skin_artifacts; ++i) {
    Blip b;
    b.row = uniform_index(rng, 0, kRows - 1);
    b.col = uniform_index(rng, 0, kCols - 2);
    b.start = uniform_index(rng, spec.phases.grasp, spec.phases.release - 1);
    b.length = uniform_index(rng, 1, 2);
    b.amplitude = uniform_real(rng, spec.artifact_amplitude_min, spec.artifact_amplitude_max);
    snaps.push_back(b);
  }

  const double release_start = static_cast<double>(spec.phases.release);
  std::vector<double> grid(kTaxels);
  for (std::size_t t = 0; t < spec.frame_count; ++t) {
    const double tt = static_cast<double>(t);
    const double opening = 1.0 - ramp(tt, release_start, spec.release_frames);
    std::fill(grid.begin(), grid.end(), spec.baseline);

    for (std::size_t f = 0; f < kFingers; ++f) {
      if (!spec.contact_frame[f]) continue;
      const double start = static_cast<double>(*spec.contact_frame[f]);
      const double depth = spec.grasp_depth[f] - 1.0;
      const double lambda = 1.0 + depth * ramp(tt, start, spec.rise_frames[f]) * opening;
      const double amp = spec.contact_gain[f] * kStressToPressure *
                         ogden_uniaxial_nominal_stress(lambda, spec.material);
      const double cc = static_cast<double>(f * kFingerCols) + 0.5 * (kFingerCols - 1);
      for (std::size_t r = 0; r < kRows; ++r) {
        const double dr = (static_cast<double>(r) - spec.patch_center_row[f]) / spec.patch_half_rows;
        for (std::size_t c = f * kFingerCols; c < (f + 1) * kFingerCols; ++c) {
          const double dc = (static_cast<double>(c) - cc) / spec.patch_half_cols;
          const double w = 1.0 - dr * dr - dc * dc;
          if (w > 0.0) grid[r * kCols + c] += amp * w;
        }
      }
    }

    if (spec.scenario.kind() == GraspKind::BranchInterference) {
      const auto f = static_cast<std::size_t>(spec.scenario.finger());
      const double start = static_cast<double>(*spec.contact_frame[f]);
      const double depth = spec.grasp_depth[f] - 1.0;
      const double lambda = 1.0 + depth * ramp(tt, start, 0.5 * spec.rise_frames[f]) * opening;
      const double amp =
          spec.ridge_gain * kStressToPressure * ogden_uniaxial_nominal_stress(lambda, spec.material);
      const auto& b = *spec.branch_patch;
      const std::size_t lo = b.row0 > 0 ? b.row0 - 1 : 0;
      const std::size_t hi = std::min(b.row1 + 1, kRows - 1);
      for (std::size_t r = lo; r <= hi; ++r) {
        const double w = (r >= b.row0 && r <= b.row1) ? 1.0 : 0.35;
        for (std::size_t c = b.col0; c <= b.col1; ++c) grid[r * kCols + c] += amp * w;
      }
    }

    for (const auto& b : blips) {
      if (t < b.start || t >= b.start + b.length) continue;
      const double phase = static_cast<double>(t - b.start + 1) / static_cast<double>(b.length + 1);
      const double s = std::sin(M_PI * phase);
      for (std::size_t r = b.row; r < b.row + 2; ++r) {
        for (std::size_t c = b.col; c < b.col + 2; ++c) grid[r * kCols + c] += b.amplitude * s * s;
      }
    }

    for (const auto& b : snaps) {
      if (t < b.start || t >= b.start + b.length) continue;
      grid[b.row * kCols + b.col] += b.amplitude;
      grid[b.row * kCols + b.col + 1] += 0.5 * b.amplitude;
    }

    if (spec.crosstalk) {
      std::vector<double> mixed(grid);
      for (std::size_t r = 0; r < kRows; ++r) {
        for (std::size_t c = 0; c < kCols; ++c) {
          double sum = 0.0;
          int n = 0;
          if (r > 0) sum += grid[(r - 1) * kCols + c], ++n;
          if (r + 1 < kRows) sum += grid[(r + 1) * kCols + c], ++n;
          if (c > 0) sum += grid[r * kCols + c - 1], ++n;
          if (c + 1 < kCols) sum += grid[r * kCols + c + 1], ++n;
          mixed[r * kCols + c] = 0.95 * grid[r * kCols + c] + 0.05 * sum / n;
        }
      }
      grid.swap(mixed);
    }

    auto& frame = rec.frames[t];
    frame.timestamp_ms = static_cast<std::int64_t>(t) * kFrameIntervalMs;
    for (std::size_t i = 0; i < kTaxels; ++i) {
      double v = grid[i];
      if (spec.noise_sd > 0.0) v += spec.noise_sd * gauss(rng);
      frame.values[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }

  auto& m = rec.meta;
  m["scenario"] = spec.scenario.to_string();
  m["seed"] = std::to_string(spec.seed);
  std::string contacts, depths, centers, rises, gains;
  for (std::size_t f = 0; f < kFingers; ++f) {
    const char* sep = f ? "," : "";
    contacts += sep + (spec.contact_frame[f] ? std::to_string(*spec.contact_frame[f]) : "-");
    depths += sep + num(spec.grasp_depth[f]);
    centers += sep + num(spec.patch_center_row[f]);
    rises += sep + num(spec.rise_frames[f]);
    gains += sep + num(spec.contact_gain[f]);
  }
  m["contact_frames"] = contacts;
  m["grasp_depth"] = depths;
  m["patch_center_row"] = centers;
  m["rise_frames"] = rises;
  m["contact_gain"] = gains;
  m["skin_artifacts"] = std::to_string(spec.skin_artifacts);
  m["noise_sd"] = num(spec.noise_sd);
  m["leaf_blips"] = std::to_string(spec.leaf_blips);
  m["crosstalk"] = spec.crosstalk ? "1" : "0";
  if (spec.branch_patch) {
    const auto& b = *spec.branch_patch;
    m["branch_patch"] = std::to_string(b.row0) + "," + std::to_string(b.row1) + "," +
                        std::to_string(b.col0) + "," + std::to_string(b.col1);
    m["ridge_gain"] = num(spec.ridge_gain);
  }
  return rec;
}

BenchmarkOptions BenchmarkOptions::sweep(std::size_t per_class, double noise_sd) {
  BenchmarkOptions o;
  o.null_without_leaves = per_class - per_class / 2;
  o.null_with_leaves = per_class / 2;
  o.obstructed = per_class;
  o.good = per_class;
  o.branch = per_class;
  o.noise_sd_override = noise_sd;
  // Clean scenarios: no overlap between classes by construction.
  o.skin_artifact_rate = 0.0;
  o.uneven_closure_prob = 0.0;
  o.obstruct_lag_min = 12;
  return o;
}

std::vector<std::pair<std::string, std::string>> BenchmarkOptions::describe() const {
  std::vector<std::pair<std::string, std::string>> d;
  d.emplace_back("mix", "null_without_leaves=" + std::to_string(null_without_leaves) +
                            " null_with_leaves=" + std::to_string(null_with_leaves) +
                            " obstructed=" + std::to_string(obstructed) +
                            " good=" + std::to_string(good) + " branch=" + std::to_string(branch));
  d.emplace_back("noise_sd", noise_sd_override ? num(*noise_sd_override)
                                               : "[" + num(noise_sd_min) + "," + num(noise_sd_max) + "]");
  d.emplace_back("grasp_depth", "[" + num(depth_min) + "," + num(depth_max) + "]");
  d.emplace_back("rise_frames", "[" + num(rise_min) + "," + num(rise_max) + "]");
  d.emplace_back("ridge_gain", "[" + num(ridge_gain_min) + "," + num(ridge_gain_max) + "]");
  d.emplace_back("obstruct_lag", "[" + std::to_string(obstruct_lag_min) + "," +
                                     std::to_string(obstruct_lag_max) + "]");
  d.emplace_back("obstruct_never_prob", num(obstruct_never_prob));
  d.emplace_back("contact_jitter", std::to_string(contact_jitter));
  d.emplace_back("leaf_blips_max", std::to_string(leaf_blips_max));
  d.emplace_back("crosstalk", crosstalk ? "1" : "0");
  d.emplace_back("skin_artifact_rate", num(skin_artifact_rate));
  d.emplace_back("uneven_closure_prob", num(uneven_closure_prob));
  d.emplace_back("uneven_rise", "[" + num(uneven_rise_min) + "," + num(uneven_rise_max) + "]");
  d.emplace_back("uneven_gain", "[" + num(uneven_gain_min) + "," + num(uneven_gain_max) + "]");
  return d;
}

std::uint64_t recording_seed(std::uint64_t seed, std::size_t index) {
  return splitmix64(splitmix64(seed) ^ (0x632be59bd9b4e019ULL * (index + 1)));
}

std::vector<GraspState> benchmark_labels(const BenchmarkOptions& o) {
  std::vector<GraspState> labels;
  for (std::size_t i = 0; i < o.null_without_leaves + o.null_with_leaves; ++i) {
    labels.push_back(GraspState::null());
  }
  for (std::size_t i = 0; i < o.obstructed; ++i) {
    labels.push_back(GraspState::obstructed(static_cast<int>(i % kFingers)));
  }
  for (std::size_t i = 0; i < o.good; ++i) labels.push_back(GraspState::good());
  for (std::size_t i = 0; i < o.branch; ++i) {
    labels.push_back(GraspState::branch(static_cast<int>(i % kFingers)));
  }
  return labels;
}

ScenarioSpec sample_scenario(std::uint64_t seed, std::size_t index, const BenchmarkOptions& o) {
  const auto labels = benchmark_labels(o);
  if (index >= labels.size()) throw ArgumentError("benchmark index out of range");

  ScenarioSpec s;
  s.scenario = labels[index];
  s.seed = recording_seed(seed, index);
  char id[16];
  std::snprintf(id, sizeof id, "rec%04zu", index);
  s.id = id;
  s.crosstalk = o.crosstalk;

  // Nuisance draws use a stream separate from the synthesizer's noise stream.
  std::mt19937_64 rng(splitmix64(s.seed ^ 0x5bd1e995ULL));
  s.noise_sd = o.noise_sd_override ? *o.noise_sd_override
                                   : uniform_real(rng, o.noise_sd_min, o.noise_sd_max);
  s.phases.approach = 0;
  s.phases.grasp = 10 + uniform_index(rng, 0, 4);
  s.phases.hold = s.phases.grasp + 22;
  s.phases.release = s.phases.hold + 18;
  s.frame_count = s.phases.release + 12;
  s.rise_frames.fill(uniform_real(rng, o.rise_min, o.rise_max));
  for (std::size_t f = 0; f < kFingers; ++f) {
    s.grasp_depth[f] = uniform_real(rng, o.depth_min, o.depth_max);
    s.patch_center_row[f] = uniform_real(rng, 14.0, 19.0);
  }

  const auto jitter = [&](std::size_t base) {
    const std::size_t j = uniform_index(rng, 0, 2 * o.contact_jitter);
    return std::max(base + j, o.contact_jitter) - o.contact_jitter;
  };

  // Contact nuisances, drawn for every scenario so the stream stays aligned.
  const bool uneven = uniform_real(rng, 0.0, 1.0) < o.uneven_closure_prob;
  const std::size_t uneven_finger = uniform_index(rng, 0, kFingers - 1);
  const double uneven_rise = uniform_real(rng, o.uneven_rise_min, o.uneven_rise_max);
  const double uneven_gain = uniform_real(rng, o.uneven_gain_min, o.uneven_gain_max);
  const std::size_t artifacts =
      o.skin_artifact_rate > 0.0 ? std::poisson_distribution<std::size_t>(o.skin_artifact_rate)(rng) : 0;
  if (s.scenario.kind() != GraspKind::Null) {
    s.skin_artifacts = artifacts;
    if (uneven) {
      s.rise_frames[uneven_finger] *= uneven_rise;
      s.contact_gain[uneven_finger] = uneven_gain;
    }
  }

  switch (s.scenario.kind()) {
    case GraspKind::Null:
      if (index >= o.null_without_leaves) {
        s.leaf_blips = uniform_index(rng, 1, std::max<std::size_t>(1, o.leaf_blips_max));
      }
      break;
    case GraspKind::Good:
    case GraspKind::BranchInterference: {
      const std::size_t base = s.phases.grasp + uniform_index(rng, 1, 4);
      for (std::size_t f = 0; f < kFingers; ++f) s.contact_frame[f] = jitter(base);
      if (s.scenario.kind() == GraspKind::BranchInterference) {
        const auto f = static_cast<std::size_t>(s.scenario.finger());
        const std::size_t array = uniform_index(rng, 1, kArraysPerFinger - 2);
        s.branch_patch = TaxelRect{array * kArraySide, array * kArraySide + kArraySide - 1,
                                   f * kFingerCols, f * kFingerCols + kFingerCols - 1};
        s.ridge_gain = uniform_real(rng, o.ridge_gain_min, o.ridge_gain_max);
      }
      break;
    }
    case GraspKind::Obstructed: {
      const auto f = static_cast<std::size_t>(s.scenario.finger());
      const std::size_t first = s.phases.grasp + uniform_index(rng, 0, 2);
      s.contact_frame[f] = first;
      const bool never = uniform_real(rng, 0.0, 1.0) < o.obstruct_never_prob;
      const std::size_t lag = uniform_index(rng, o.obstruct_lag_min, o.obstruct_lag_max);
      for (std::size_t g = 0; g < kFingers; ++g) {
        if (g == f || never) continue;
        const std::size_t c = std::max(jitter(first + lag), first + 1);
        s.contact_frame[g] = std::min(c, s.phases.release - 1);
      }
      break;
    }
  }
  return s;
}

std::vector<GraspRecording> generate_benchmark_serial(std::uint64_t seed,
                                                      const BenchmarkOptions& opts) {
  const std::size_t n = benchmark_labels(opts).size();
  std::vector<GraspRecording> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(synthesize_grasp(sample_scenario(seed, i, opts)));
  return out;
}

std::vector<GraspRecording> generate_benchmark(std::uint64_t seed, const BenchmarkOptions& opts) {
  const std::size_t n = benchmark_labels(opts).size();
  // Draw and validate specs serially so errors surface outside the parallel region.
  std::vector<ScenarioSpec> specs;
  specs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    specs.push_back(sample_scenario(seed, i, opts));
    specs.back().validate();
  }
  std::vector<GraspRecording> out(n);
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = synthesize_grasp(specs[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace tgrasp
