// tgrasp: generate, calibrate, classify, replay and evaluate tactile grasp datasets.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "tgrasp/config_io.hpp"
#include "tgrasp/controller.hpp"
#include "tgrasp/dataset.hpp"
#include "tgrasp/errors.hpp"
#include "tgrasp/estimator.hpp"
#include "tgrasp/evaluation.hpp"
#include "tgrasp/simulator.hpp"

namespace {

using namespace tgrasp;

enum ExitCode {
  kOk = 0,
  kUnexpected = 1,
  kUsage = 2,
  kFormat = 3,
  kCalibration = 4,
  kReconciliation = 5,
  kIo = 6,
  kInvalidInput = 7,
  kConfigError = 8,
};

int exit_code_for(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Format: return kFormat;
    case ErrorCategory::Calibration: return kCalibration;
    case ErrorCategory::Reconciliation: return kReconciliation;
    case ErrorCategory::Io: return kIo;
    case ErrorCategory::Structural:
    case ErrorCategory::Argument: return kInvalidInput;
    case ErrorCategory::Config: return kConfigError;
  }
  return kUnexpected;
}

ToolConfig load_config(const std::string& path) {
  return path.empty() ? ToolConfig{} : read_config(path);
}

const GraspRecording& find_recording(const Dataset& ds, const std::string& id) {
  if (id.empty()) {
    if (ds.recordings.empty()) throw ArgumentError("dataset has no recordings");
    return ds.recordings.front();
  }
  for (const auto& r : ds.recordings) {
    if (r.id == id) return r;
  }
  throw ArgumentError("no recording '" + id + "' in dataset");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tactile grasp-state toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = kDefaultBenchmarkSeed;
  std::string dataset, config_path, predictions, report, output, id, trace_out;
  std::optional<double> noise;
  std::size_t sweep = 0;
  bool realtime = false;

  auto* gen = app.add_subcommand("generate", "Synthesize a labeled benchmark dataset");
  gen->add_option("--seed", seed, "Benchmark seed");
  gen->add_option("--dataset", dataset, "Output manifest path")->required();
  gen->add_option("--noise", noise, "Fixed noise sd for every recording");
  gen->add_option("--sweep", sweep, "Equal per-class sweep of this size instead of the 200-grasp mix");

  auto* cal = app.add_subcommand("calibrate", "Grid-search rule-estimator thresholds");
  cal->add_option("--dataset", dataset, "Labeled dataset manifest")->required();
  cal->add_option("--config", config_path, "Base configuration");
  cal->add_option("--output", output, "Write the calibrated configuration here");

  auto* cls = app.add_subcommand("classify", "Classify one recording and print the decision trace");
  cls->add_option("--dataset", dataset, "Dataset manifest")->required();
  cls->add_option("--id", id, "Recording id (default: first)");
  cls->add_option("--config", config_path, "Configuration file");
  cls->add_option("--trace-out", trace_out, "Dump per-frame finger variance as tabular text");

  auto* rep = app.add_subcommand("replay", "Stream a recording through pipeline, estimator and controller");
  rep->add_option("--dataset", dataset, "Dataset manifest")->required();
  rep->add_option("--id", id, "Recording id (default: first)");
  rep->add_option("--config", config_path, "Configuration file");
  rep->add_option("--report", report, "Write the cycle report here");
  rep->add_flag("--realtime", realtime, "Pace frames at the recording's frame interval");

  auto* ev = app.add_subcommand("evaluate", "Score predictions against dataset labels");
  ev->add_option("--dataset", dataset, "Dataset manifest")->required();
  ev->add_option("--predictions", predictions, "External predictions file (default: rule estimator)");
  ev->add_option("--config", config_path, "Configuration file for the rule estimator");
  ev->add_option("--report", report, "Write the machine-readable report here");
  ev->add_option("--write-predictions", output, "Write the evaluated predictions here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) {
      BenchmarkOptions opts = sweep ? BenchmarkOptions::sweep(sweep, noise.value_or(0.0))
                                    : BenchmarkOptions::table_mix();
      if (noise) opts.noise_sd_override = *noise;
      const auto recs = generate_benchmark(seed, opts);
      auto params = opts.describe();
      params.emplace_back("seed", std::to_string(seed));
      const auto crc = write_dataset(dataset, recs, params);
      std::cout << "wrote " << recs.size() << " recordings to " << dataset << " (payload crc32 "
                << crc_hex(crc) << ")\n";
    } else if (*cal) {
      auto cfg = load_config(config_path);
      const auto ds = read_dataset(dataset);
      const auto res = calibrate(ds.recordings, cfg.pipeline);
      cfg.estimator = res.config;
      const auto text = format_config(cfg);
      std::cout << text << "# macro accuracy " << res.macro_accuracy << " over "
                << ds.recordings.size() << " recordings; " << res.optimal_configs << " of "
                << res.evaluated_configs << " grid points optimal\n";
      if (!output.empty()) write_text(output, text);
    } else if (*cls) {
      const auto cfg = load_config(config_path);
      const auto ds = read_dataset(dataset);
      const auto& rec = find_recording(ds, id);
      const auto features = summarize(compute_features(rec, cfg.pipeline));
      const auto tr = classify_traced(features, cfg.estimator);
      std::cout << "recording " << rec.id << '\n'
                << "label " << (rec.label ? rec.label->to_string() : "none") << '\n'
                << "frames " << rec.frames.size() << " analysed " << features.span.begin << ".."
                << features.span.end << '\n';
      for (std::size_t f = 0; f < kFingers; ++f) {
        std::cout << "finger " << f << " max_variance " << tr.inputs.per_finger_max[f] << " onset "
                  << (tr.inputs.onsets[f] ? std::to_string(*tr.inputs.onsets[f]) : "-") << '\n';
      }
      std::cout << "max_variance " << tr.max_variance << " vs t_null " << cfg.estimator.t_null << '\n'
                << "onset_spread "
                << (tr.onset_spread ? std::to_string(*tr.onset_spread) : "-") << " vs dt_obstruct "
                << cfg.estimator.dt_obstruct << '\n'
                << "branch_ratio " << tr.branch_ratio << " (finger " << tr.ratio_finger
                << ") vs r_branch " << cfg.estimator.r_branch << '\n'
                << "rule " << rule_name(tr.rule) << '\n'
                << "state " << tr.state.to_string() << '\n';
      if (!trace_out.empty()) {
        std::ostringstream t;
        t << "frame\ttimestamp_ms\tfinger0\tfinger1\tfinger2\tfinger3\n";
        for (std::size_t i = 0; i < rec.frames.size(); ++i) {
          t << i << '\t' << rec.frames[i].timestamp_ms;
          for (std::size_t f = 0; f < kFingers; ++f) t << '\t' << features.finger_series[f][i];
          t << '\n';
        }
        write_text(trace_out, t.str());
      }
    } else if (*rep) {
      const auto cfg = load_config(config_path);
      const auto ds = read_dataset(dataset);
      const auto& rec = find_recording(ds, id);
      std::function<void(std::size_t)> pace;
      if (realtime) {
        const auto interval = std::chrono::milliseconds(ds.frame_interval_ms);
        pace = [interval](std::size_t) { std::this_thread::sleep_for(interval); };
      }
      const std::vector<GraspRecording> attempts{rec};
      const auto cycle = run_cycle(attempts, cfg.estimator, cfg.pipeline, cfg.controller, pace);
      const auto text = cycle.serialize();
      std::cout << text;
      for (const auto& l : cycle.lines) {
        if (l.warning) std::cerr << "warning: " << *l.warning << '\n';
      }
      if (!report.empty()) write_text(report, text);
    } else if (*ev) {
      const auto cfg = load_config(config_path);
      const auto ds = read_dataset(dataset);
      std::vector<Prediction> preds;
      std::string source;
      if (predictions.empty()) {
        preds = predict_with_rules(ds.recordings, cfg.pipeline, cfg.estimator);
        source = "rule_estimator";
      } else {
        preds = read_predictions(predictions);
        source = "file:" + std::filesystem::path(predictions).filename().string();
      }
      const auto digest = "crc32:" + crc_hex(ds.payload_crc32);
      const auto result = evaluate(ds.recordings, preds, digest, source);
      std::cout << result.to_table();
      if (!report.empty()) write_text(report, result.to_structured());
      if (!output.empty()) {
        std::ofstream out(output, std::ios::trunc);
        if (!out) throw IoError("cannot open " + output + " for writing");
        write_predictions(out, preds);
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUnexpected;
  }
  return kOk;
}
