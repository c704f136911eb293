#include "tgrasp/config_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tgrasp/errors.hpp"

namespace tgrasp {

namespace {

std::string num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("config: bad value '" + text + "' for " + key);
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false") return false;
  throw ConfigError("config: bad boolean '" + text + "' for " + key);
}

}  // namespace

std::string format_config(const ToolConfig& c) {
  std::ostringstream out;
  out << "TGC 1\n"
      << "t_null " << num(c.estimator.t_null) << '\n'
      << "t_onset " << num(c.estimator.t_onset) << '\n'
      << "dt_obstruct " << c.estimator.dt_obstruct << '\n'
      << "r_branch " << num(c.estimator.r_branch) << '\n'
      << "smoothing_window " << c.pipeline.smoothing_window << '\n'
      << "variance_window " << c.pipeline.variance_window << '\n'
      << "onset_threshold " << num(c.pipeline.onset_threshold) << '\n'
      << "frame_interval_ms " << c.pipeline.frame_interval_ms << '\n'
      << "normalization " << (c.normalization == NormalizationMode::PerTaxel ? "per_taxel" : "global")
      << '\n'
      << "max_retries " << c.controller.max_retries << '\n'
      << "recheck_after_release " << (c.controller.recheck_after_release ? 1 : 0) << '\n'
      << "timeout_frames " << c.controller.timeout_frames << '\n';
  return out.str();
}

ToolConfig parse_config(std::istream& in) {
  ToolConfig c;
  std::string line;
  if (!std::getline(in, line) || line.rfind("TGC 1", 0) != 0) {
    throw ConfigError("config: missing 'TGC 1' header");
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    std::string key, value, trailing;
    ls >> key >> value;
    if (value.empty() || (ls >> trailing)) throw ConfigError("config: malformed line '" + line + "'");
    if (key == "t_null") c.estimator.t_null = parse_value<double>(key, value);
    else if (key == "t_onset") c.estimator.t_onset = parse_value<double>(key, value);
    else if (key == "dt_obstruct") c.estimator.dt_obstruct = parse_value<std::size_t>(key, value);
    else if (key == "r_branch") c.estimator.r_branch = parse_value<double>(key, value);
    else if (key == "smoothing_window") c.pipeline.smoothing_window = parse_value<std::size_t>(key, value);
    else if (key == "variance_window") c.pipeline.variance_window = parse_value<std::size_t>(key, value);
    else if (key == "onset_threshold") c.pipeline.onset_threshold = parse_value<double>(key, value);
    else if (key == "frame_interval_ms") c.pipeline.frame_interval_ms = parse_value<std::int64_t>(key, value);
    else if (key == "normalization") {
      if (value == "per_taxel") c.normalization = NormalizationMode::PerTaxel;
      else if (value == "global") c.normalization = NormalizationMode::Global;
      else throw ConfigError("config: normalization must be per_taxel or global");
    }
    else if (key == "max_retries") c.controller.max_retries = parse_value<std::size_t>(key, value);
    else if (key == "recheck_after_release") c.controller.recheck_after_release = parse_bool(key, value);
    else if (key == "timeout_frames") c.controller.timeout_frames = parse_value<std::size_t>(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  c.pipeline.validate();
  c.estimator.validate();
  return c;
}

ToolConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in);
}

void write_config(const std::filesystem::path& path, const ToolConfig& cfg) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << format_config(cfg);
}

}  // namespace tgrasp
