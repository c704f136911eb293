#include "tgrasp/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tgrasp/errors.hpp"
#include "tgrasp/kernels.hpp"

namespace tgrasp {

EstimatorConfig EstimatorConfig::shipped() {
  // Output of `tgrasp calibrate` on generate_benchmark(kDefaultBenchmarkSeed)
  // with the default pipeline; regression-tested.
  EstimatorConfig c;
  c.t_null = 0.003920062099965141;
  c.t_onset = 0.003920062099965141;
  c.dt_obstruct = 9;
  c.r_branch = 6.704751154404436;  // 1.05^39
  return c;
}

void EstimatorConfig::validate() const {
  if (!(t_null > 0.0)) throw ConfigError("t_null must be > 0");
  if (!(t_onset > 0.0)) throw ConfigError("t_onset must be > 0");
  if (dt_obstruct < 1) throw ConfigError("dt_obstruct must be >= 1 frame");
  if (!(r_branch > 0.0)) throw ConfigError("r_branch must be > 0");
}

std::string_view rule_name(DecisionRule rule) {
  switch (rule) {
    case DecisionRule::NullBelowThreshold: return "null_below_threshold";
    case DecisionRule::OnsetSpread: return "onset_spread";
    case DecisionRule::MissingOnset: return "missing_onset";
    case DecisionRule::BranchRatio: return "branch_ratio";
    case DecisionRule::Default: return "default_good";
  }
  return "?";
}

FingerFeatures summarize(const PipelineFeatures& features) {
  return {features.span, features.per_finger_max, features.finger_series};
}

int localize_branch_finger(const std::array<double, kFingers>& v) {
  int best = 0;
  for (int f = 1; f < static_cast<int>(kFingers); ++f) {
    if (v[f] > v[best]) best = f;
  }
  return best;
}

double median_of_others(const std::array<double, kFingers>& v, int finger) {
  std::array<double, kFingers - 1> o{};
  std::size_t k = 0;
  for (int f = 0; f < static_cast<int>(kFingers); ++f) {
    if (f != finger) o[k++] = v[f];
  }
  std::sort(o.begin(), o.end());
  return o[1];
}

DecisionInputs decision_inputs(const FingerFeatures& features, const EstimatorConfig& cfg) {
  DecisionInputs in;
  in.per_finger_max = features.per_finger_max;
  for (std::size_t f = 0; f < kFingers; ++f) {
    in.onsets[f] = onset_time(features.finger_series[f], cfg.t_onset, features.span);
  }
  return in;
}

DecisionTrace decide(const DecisionInputs& in, const EstimatorConfig& cfg) {
  DecisionTrace tr;
  tr.inputs = in;
  const auto& pf = in.per_finger_max;
  tr.max_variance = *std::max_element(pf.begin(), pf.end());
  tr.ratio_finger = localize_branch_finger(pf);
  const double med = median_of_others(pf, tr.ratio_finger);
  tr.branch_ratio = med > 0.0 ? pf[tr.ratio_finger] / med
                              : (pf[tr.ratio_finger] > 0.0 ? INFINITY : 0.0);

  if (tr.max_variance < cfg.t_null) {
    tr.state = GraspState::null();
    tr.rule = DecisionRule::NullBelowThreshold;
    return tr;
  }

  std::optional<std::size_t> earliest, latest;
  int earliest_finger = -1;
  bool missing = false;
  for (int f = 0; f < static_cast<int>(kFingers); ++f) {
    const auto& o = in.onsets[f];
    if (!o) {
      missing = true;
      continue;
    }
    if (!earliest || *o < *earliest) {
      earliest = *o;
      earliest_finger = f;
    }
    if (!latest || *o > *latest) latest = *o;
  }
  if (earliest) {
    tr.onset_spread = *latest - *earliest;
    if (*tr.onset_spread > cfg.dt_obstruct) {
      tr.state = GraspState::obstructed(earliest_finger);
      tr.rule = DecisionRule::OnsetSpread;
      return tr;
    }
    if (missing) {
      tr.state = GraspState::obstructed(earliest_finger);
      tr.rule = DecisionRule::MissingOnset;
      return tr;
    }
  }

  if (pf[tr.ratio_finger] > cfg.r_branch * med) {
    tr.state = GraspState::branch(tr.ratio_finger);
    tr.rule = DecisionRule::BranchRatio;
    return tr;
  }
  tr.state = GraspState::good();
  tr.rule = DecisionRule::Default;
  return tr;
}

DecisionTrace classify_traced(const FingerFeatures& features, const EstimatorConfig& cfg) {
  if (features.span.empty() || features.finger_series[0].empty()) {
    throw ArgumentError("classify: features cover zero frames");
  }
  return decide(decision_inputs(features, cfg), cfg);
}

GraspState classify(const FingerFeatures& features, const EstimatorConfig& cfg) {
  return classify_traced(features, cfg).state;
}

GraspState classify(const PipelineFeatures& features, const EstimatorConfig& cfg) {
  return classify(summarize(features), cfg);
}

std::vector<FingerFeatures> extract_features(std::span<const GraspRecording> recordings,
                                             const PipelineConfig& cfg) {
  cfg.validate();
  for (const auto& rec : recordings) validate_recording(rec);
  std::vector<FingerFeatures> out(recordings.size());
  const long n = static_cast<long>(recordings.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    const auto& rec = recordings[static_cast<std::size_t>(i)];
    const auto m =
        kernels::variance_matrix_serial(rec.frames, cfg.smoothing_window, cfg.variance_window);
    auto& ff = out[static_cast<std::size_t>(i)];
    ff.span = analysis_span(rec.phases, rec.frames.size());
    ff.per_finger_max = per_finger_max_variance(m, ff.span);
    ff.finger_series = finger_max_series(m);
  }
  return out;
}

namespace {

// Class slot used by the calibration objective.
std::size_t slot(GraspKind k) { return static_cast<std::size_t>(k); }

bool scored_correct(const GraspState& truth, const GraspState& pred) {
  if (truth.kind() != pred.kind()) return false;
  if (truth.kind() == GraspKind::BranchInterference) return truth.finger() == pred.finger();
  return true;
}

std::vector<double> null_candidates(std::span<const FingerFeatures> features, std::size_t cap) {
  std::vector<double> maxima;
  for (const auto& f : features) {
    maxima.push_back(*std::max_element(f.per_finger_max.begin(), f.per_finger_max.end()));
  }
  std::sort(maxima.begin(), maxima.end());
  maxima.erase(std::unique(maxima.begin(), maxima.end()), maxima.end());
  std::vector<double> cands;
  for (std::size_t i = 0; i + 1 < maxima.size(); ++i) {
    const double a = maxima[i], b = maxima[i + 1];
    cands.push_back(a > 0.0 ? std::sqrt(a * b) : 0.5 * b);
  }
  if (cands.size() > cap && cap > 1) {
    std::vector<double> sub;
    for (std::size_t k = 0; k < cap; ++k) {
      sub.push_back(cands[k * (cands.size() - 1) / (cap - 1)]);
    }
    sub.erase(std::unique(sub.begin(), sub.end()), sub.end());
    cands = std::move(sub);
  }
  return cands;
}

}  // namespace

CalibrationResult calibrate_features(std::span<const FingerFeatures> features,
                                     std::span<const GraspState> labels,
                                     const CalibrationGrid& grid) {
  if (features.size() != labels.size()) {
    throw ArgumentError("calibrate: features/labels size mismatch");
  }
  std::array<double, kGraspKinds> class_count{};
  for (const auto& l : labels) class_count[slot(l.kind())] += 1.0;
  std::string absent;
  for (std::size_t k = 0; k < kGraspKinds; ++k) {
    if (class_count[k] == 0.0) {
      if (!absent.empty()) absent += ", ";
      absent += kind_name(static_cast<GraspKind>(k));
    }
  }
  if (!absent.empty()) throw CalibrationError("calibration set lacks classes: " + absent);

  const auto t_cands = null_candidates(features, grid.max_null_candidates);
  if (t_cands.empty()) throw CalibrationError("calibration set has no separable max variance");
  std::vector<double> r_cands(grid.r_steps);
  for (std::size_t k = 0; k < grid.r_steps; ++k) r_cands[k] = std::pow(grid.r_base, double(k + 1));
  const std::size_t n_dt = grid.dt_max >= grid.dt_min ? grid.dt_max - grid.dt_min + 1 : 0;
  if (n_dt == 0 || r_cands.empty()) throw ConfigError("calibration grid is empty");

  const std::size_t n_rt = r_cands.size();
  const std::size_t n_cfg = t_cands.size() * n_dt * n_rt;
  std::vector<double> score(n_cfg, 0.0);

  const long nt = static_cast<long>(t_cands.size());
#pragma omp parallel for schedule(dynamic)
  for (long ti = 0; ti < nt; ++ti) {
    EstimatorConfig cfg;
    cfg.t_null = cfg.t_onset = t_cands[static_cast<std::size_t>(ti)];
    std::vector<DecisionInputs> inputs;
    inputs.reserve(features.size());
    for (const auto& f : features) inputs.push_back(decision_inputs(f, cfg));
    for (std::size_t di = 0; di < n_dt; ++di) {
      cfg.dt_obstruct = grid.dt_min + di;
      for (std::size_t ri = 0; ri < n_rt; ++ri) {
        cfg.r_branch = r_cands[ri];
        std::array<double, kGraspKinds> correct{};
        for (std::size_t i = 0; i < inputs.size(); ++i) {
          if (scored_correct(labels[i], decide(inputs[i], cfg).state)) {
            correct[slot(labels[i].kind())] += 1.0;
          }
        }
        double s = 0.0;
        for (std::size_t k = 0; k < kGraspKinds; ++k) s += correct[k] / class_count[k];
        score[(static_cast<std::size_t>(ti) * n_dt + di) * n_rt + ri] = s / kGraspKinds;
      }
    }
  }

  const double best = *std::max_element(score.begin(), score.end());
  std::vector<std::size_t> optimal;
  for (std::size_t i = 0; i < n_cfg; ++i) {
    if (score[i] == best) optimal.push_back(i);
  }

  // Lexicographic median over (t, dt, r) of the optimal set.
  auto t_of = [&](std::size_t i) { return i / (n_dt * n_rt); };
  auto d_of = [&](std::size_t i) { return (i / n_rt) % n_dt; };
  auto r_of = [&](std::size_t i) { return i % n_rt; };
  const std::size_t t_pick = t_of(optimal[optimal.size() / 2]);
  std::vector<std::size_t> at_t;
  for (auto i : optimal) {
    if (t_of(i) == t_pick) at_t.push_back(i);
  }
  const std::size_t d_pick = d_of(at_t[at_t.size() / 2]);
  std::vector<std::size_t> at_td;
  for (auto i : at_t) {
    if (d_of(i) == d_pick) at_td.push_back(i);
  }
  const std::size_t r_pick = r_of(at_td[at_td.size() / 2]);

  CalibrationResult res;
  res.config.t_null = res.config.t_onset = t_cands[t_pick];
  res.config.dt_obstruct = grid.dt_min + d_pick;
  res.config.r_branch = r_cands[r_pick];
  res.macro_accuracy = best;
  res.optimal_configs = optimal.size();
  res.evaluated_configs = n_cfg;
  return res;
}

CalibrationResult calibrate(std::span<const GraspRecording> labeled, const PipelineConfig& pcfg,
                            const CalibrationGrid& grid) {
  std::vector<GraspState> labels;
  std::array<bool, kGraspKinds> seen{};
  for (const auto& r : labeled) {
    if (!r.label) throw CalibrationError("recording '" + r.id + "' has no label");
    labels.push_back(*r.label);
    seen[slot(r.label->kind())] = true;
  }
  std::string absent;
  for (std::size_t k = 0; k < kGraspKinds; ++k) {
    if (!seen[k]) {
      if (!absent.empty()) absent += ", ";
      absent += kind_name(static_cast<GraspKind>(k));
    }
  }
  if (!absent.empty()) throw CalibrationError("calibration set lacks classes: " + absent);
  const auto features = extract_features(labeled, pcfg);
  return calibrate_features(features, labels, grid);
}

}  // namespace tgrasp
