#include <doctest.h>

#include <sstream>

#include "tgrasp/config_io.hpp"
#include "tgrasp/errors.hpp"

using namespace tgrasp;

TEST_CASE("config: format and parse round-trip") {
  ToolConfig c;
  c.estimator.t_null = 0.0123456789012345;
  c.estimator.t_onset = 0.002;
  c.estimator.dt_obstruct = 13;
  c.estimator.r_branch = 1.05 * 1.05 * 1.05;
  c.pipeline.variance_window = 12;
  c.controller.max_retries = 5;
  c.controller.recheck_after_release = true;
  c.normalization = NormalizationMode::Global;
  std::istringstream in(format_config(c));
  const auto back = parse_config(in);
  CHECK(back.estimator == c.estimator);
  CHECK(back.pipeline.variance_window == 12);
  CHECK(back.controller.max_retries == 5);
  CHECK(back.controller.recheck_after_release);
  CHECK(back.normalization == NormalizationMode::Global);
}

TEST_CASE("config: defaults use the shipped thresholds") {
  std::istringstream in("TGC 1\n# only one override\nmax_retries 1\n");
  const auto c = parse_config(in);
  CHECK(c.estimator == EstimatorConfig::shipped());
  CHECK(c.controller.max_retries == 1);
}

TEST_CASE("config: errors") {
  for (const char* bad : {"", "TGX 1\n", "TGC 1\nwobble 3\n", "TGC 1\nt_null abc\n",
                          "TGC 1\nt_null 0.1 0.2\n", "TGC 1\nrecheck_after_release maybe\n",
                          "TGC 1\nnormalization sideways\n", "TGC 1\nvariance_window 1\n",
                          "TGC 1\nt_null -1\n"}) {
    std::istringstream in(bad);
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_config(in), ConfigError);
  }
  CHECK_THROWS_AS(read_config("/nonexistent/path/x.tgc"), IoError);
}
