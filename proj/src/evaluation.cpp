#include "tgrasp/evaluation.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "tgrasp/errors.hpp"

namespace tgrasp {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double ratio(std::size_t num, std::size_t den) {
  return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

}  // namespace

Prediction prediction_of(std::string id, const GraspState& state) {
  Prediction p{std::move(id), state.kind(), std::nullopt};
  if (state.has_finger()) p.finger = state.finger();
  return p;
}

std::vector<Prediction> parse_predictions(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = body.find(',', start);
      fields.push_back(trim(body.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const auto where = "predictions line " + std::to_string(line_no);
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty()) {
      throw FormatError(where + ": expected 'id, state[, finger]'");
    }
    Prediction p;
    p.id = std::string(fields[0]);
    p.kind = parse_kind(fields[1]);
    if (fields.size() == 3) {
      int f = -1;
      const auto s = fields[2];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), f);
      if (ec != std::errc() || ptr != s.data() + s.size() || f < 0 || f >= static_cast<int>(kFingers)) {
        throw FormatError(where + ": bad finger '" + std::string(s) + "'");
      }
      if (p.kind == GraspKind::Null || p.kind == GraspKind::Good) {
        throw FormatError(where + ": finger given for a state without one");
      }
      p.finger = f;
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open predictions file " + path.string());
  return parse_predictions(in);
}

void write_predictions(std::ostream& out, std::span<const Prediction> predictions) {
  for (const auto& p : predictions) {
    out << p.id << ", " << kind_name(p.kind);
    if (p.finger) out << ", " << *p.finger;
    out << '\n';
  }
}

std::vector<Prediction> predict_with_rules(std::span<const GraspRecording> recordings,
                                           const PipelineConfig& pcfg, const EstimatorConfig& ecfg) {
  ecfg.validate();
  const auto features = extract_features(recordings, pcfg);
  std::vector<Prediction> out;
  out.reserve(recordings.size());
  for (std::size_t i = 0; i < recordings.size(); ++i) {
    out.push_back(prediction_of(recordings[i].id, classify(features[i], ecfg)));
  }
  return out;
}

std::size_t EvaluationReport::total() const {
  std::size_t n = 0;
  for (auto c : class_counts) n += c;
  return n;
}

EvaluationReport evaluate(std::span<const GraspRecording> recordings,
                          std::span<const Prediction> predictions, std::string dataset_digest,
                          std::string source) {
  std::map<std::string, const Prediction*> by_id;
  std::vector<std::string> duplicates;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.id, &p).second) duplicates.push_back(p.id);
  }
  std::vector<std::string> missing;
  std::map<std::string, bool> known;
  for (const auto& r : recordings) {
    known[r.id] = true;
    if (!by_id.count(r.id)) missing.push_back(r.id);
  }
  std::vector<std::string> extra;
  for (const auto& [id, p] : by_id) {
    if (!known.count(id)) extra.push_back(id);
  }
  if (!missing.empty() || !extra.empty() || !duplicates.empty()) {
    std::ostringstream msg;
    msg << "predictions do not match the dataset";
    auto list = [&](const char* what, const std::vector<std::string>& ids) {
      if (ids.empty()) return;
      msg << "; " << what << " (" << ids.size() << "):";
      for (const auto& id : ids) msg << ' ' << id;
    };
    list("missing", missing);
    list("extra", extra);
    list("duplicate", duplicates);
    throw ReconciliationError(msg.str());
  }

  EvaluationReport rep;
  rep.dataset_digest = std::move(dataset_digest);
  rep.source = std::move(source);
  std::size_t localized = 0, correct = 0;
  std::array<std::size_t, kGraspKinds> hits{};
  for (const auto& r : recordings) {
    if (!r.label) throw ArgumentError("recording '" + r.id + "' has no ground-truth label");
    const auto& truth = *r.label;
    const auto& pred = *by_id.at(r.id);
    const auto ti = static_cast<std::size_t>(truth.kind());
    const auto pi = static_cast<std::size_t>(pred.kind);
    ++rep.class_counts[ti];
    ++rep.confusion[ti][pi];
    if (ti == pi) {
      ++hits[ti];
      ++correct;
    }
    if (truth.kind() == GraspKind::BranchInterference) {
      const auto tf = static_cast<std::size_t>(truth.finger());
      if (pred.kind == GraspKind::BranchInterference && pred.finger) {
        ++rep.branch_fingers[tf][static_cast<std::size_t>(*pred.finger)];
        if (*pred.finger == truth.finger()) ++localized;
      } else {
        ++rep.branch_fingers[tf][kFingers];
      }
    }
  }
  for (std::size_t k = 0; k < kGraspKinds; ++k) {
    rep.per_class_accuracy[k] = ratio(hits[k], rep.class_counts[k]);
  }
  rep.localization_accuracy =
      ratio(localized, rep.class_counts[static_cast<std::size_t>(GraspKind::BranchInterference)]);
  rep.overall_accuracy = ratio(correct, recordings.size());
  return rep;
}

namespace {

constexpr std::array<double, kGraspKinds> kReference{
    ReferenceAccuracy::null_grasp, ReferenceAccuracy::good, ReferenceAccuracy::branch,
    ReferenceAccuracy::obstructed};

}  // namespace

std::string EvaluationReport::to_table() const {
  std::ostringstream out;
  char buf[160];
  out << "dataset " << dataset_digest << "  recordings " << total() << "  source " << source
      << "\n\n";
  std::snprintf(buf, sizeof buf, "%-12s %7s %9s %11s\n", "scenario", "grasps", "accuracy",
                "reference");
  out << buf;
  for (auto kind : {GraspKind::Null, GraspKind::Obstructed, GraspKind::Good,
                    GraspKind::BranchInterference}) {
    const auto k = static_cast<std::size_t>(kind);
    const double acc =
        kind == GraspKind::BranchInterference ? localization_accuracy : per_class_accuracy[k];
    std::snprintf(buf, sizeof buf, "%-12s %7zu %8.1f%% %10.1f%%\n", std::string(kind_name(kind)).c_str(),
                  class_counts[k], 100.0 * acc, 100.0 * kReference[k]);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-12s %7zu %8.1f%%\n", "overall", total(), 100.0 * overall_accuracy);
  out << buf;
  out << "(branch row: finger localization; branch detected as any finger "
      << fixed(100.0 * per_class_accuracy[static_cast<std::size_t>(GraspKind::BranchInterference)], 1)
      << "%)\n\nconfusion (rows truth, columns predicted)\n";
  std::snprintf(buf, sizeof buf, "%-12s %6s %6s %6s %11s\n", "", "null", "good", "branch", "obstructed");
  out << buf;
  for (std::size_t t = 0; t < kGraspKinds; ++t) {
    std::snprintf(buf, sizeof buf, "%-12s %6zu %6zu %6zu %11zu\n",
                  std::string(kind_name(static_cast<GraspKind>(t))).c_str(), confusion[t][0],
                  confusion[t][1], confusion[t][2], confusion[t][3]);
    out << buf;
  }
  out << "\nbranch finger (rows truth, columns predicted finger, '-' = not a branch call)\n";
  std::snprintf(buf, sizeof buf, "%-12s %4s %4s %4s %4s %4s\n", "", "f0", "f1", "f2", "f3", "-");
  out << buf;
  for (std::size_t f = 0; f < kFingers; ++f) {
    std::snprintf(buf, sizeof buf, "finger %-5zu %4zu %4zu %4zu %4zu %4zu\n", f,
                  branch_fingers[f][0], branch_fingers[f][1], branch_fingers[f][2],
                  branch_fingers[f][3], branch_fingers[f][4]);
    out << buf;
  }
  out << "\nreference: conventional method on 200 hardware grasps (null 96.6, obstructed 88.5, "
         "good 52.1, branch 75.0)\n";
  return out.str();
}

std::string EvaluationReport::to_structured() const {
  std::ostringstream out;
  out << "report_version 1\n"
      << "dataset_digest " << dataset_digest << '\n'
      << "source " << source << '\n'
      << "recordings " << total() << '\n';
  for (std::size_t k = 0; k < kGraspKinds; ++k) {
    out << "class " << kind_name(static_cast<GraspKind>(k)) << " count=" << class_counts[k]
        << " correct=" << confusion[k][k] << " accuracy=" << fixed(per_class_accuracy[k], 6)
        << " reference=" << fixed(kReference[k], 3) << '\n';
  }
  std::size_t localized = 0;
  for (std::size_t f = 0; f < kFingers; ++f) localized += branch_fingers[f][f];
  out << "localization correct=" << localized
      << " total=" << class_counts[static_cast<std::size_t>(GraspKind::BranchInterference)]
      << " accuracy=" << fixed(localization_accuracy, 6) << '\n'
      << "overall accuracy=" << fixed(overall_accuracy, 6) << '\n';
  for (std::size_t t = 0; t < kGraspKinds; ++t) {
    out << "confusion " << kind_name(static_cast<GraspKind>(t));
    for (std::size_t p = 0; p < kGraspKinds; ++p) out << ' ' << confusion[t][p];
    out << '\n';
  }
  for (std::size_t f = 0; f < kFingers; ++f) {
    out << "branch_finger " << f;
    for (std::size_t p = 0; p <= kFingers; ++p) out << ' ' << branch_fingers[f][p];
    out << '\n';
  }
  return out.str();
}

}  // namespace tgrasp
