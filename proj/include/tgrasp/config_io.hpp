#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "tgrasp/controller.hpp"
#include "tgrasp/estimator.hpp"
#include "tgrasp/pipeline.hpp"

namespace tgrasp {

/// Everything the command-line tools can be configured with. Stored as
/// `key value` lines under a `TGC 1` header, the same style as the dataset
/// manifest. Keys that are absent keep their defaults.
struct ToolConfig {
  PipelineConfig pipeline;
  EstimatorConfig estimator = EstimatorConfig::shipped();
  ControllerConfig controller;
  NormalizationMode normalization = NormalizationMode::PerTaxel;
};

std::string format_config(const ToolConfig& cfg);

/// Throws ConfigError on unknown keys or malformed values.
ToolConfig parse_config(std::istream& in);
ToolConfig read_config(const std::filesystem::path& path);
void write_config(const std::filesystem::path& path, const ToolConfig& cfg);

}  // namespace tgrasp
