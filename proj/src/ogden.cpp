#include "tgrasp/ogden.hpp"

#include <cmath>

#include "tgrasp/errors.hpp"

namespace tgrasp {

OgdenParams OgdenParams::ninjaflex() {
  return {{{0.03829, 4.1352}, {24.4601, 0.2123}, {24.4613, 0.2122}}};
}

double OgdenParams::shear_modulus() const {
  double s = 0.0;
  for (const auto& t : terms) s += t.mu * t.alpha;
  return 0.5 * s;
}

void OgdenParams::validate() const {
  if (terms.empty()) throw ArgumentError("Ogden parameter set has no terms");
  for (const auto& t : terms) {
    if (t.alpha == 0.0 || !std::isfinite(t.alpha) || !std::isfinite(t.mu)) {
      throw ArgumentError("Ogden term has zero or non-finite alpha/mu");
    }
  }
  if (!(shear_modulus() > 0.0)) throw ArgumentError("Ogden parameters: sum(mu*alpha) must be > 0");
}

double ogden_uniaxial_nominal_stress(double lambda, const OgdenParams& params) {
  if (!(lambda > 0.0)) throw ArgumentError("stretch ratio must be > 0");
  params.validate();
  double p = 0.0;
  for (const auto& t : params.terms) {
    p += (2.0 * t.mu / t.alpha) *
         (std::pow(lambda, t.alpha - 1.0) - std::pow(lambda, -0.5 * t.alpha - 1.0));
  }
  return p;
}

}  // namespace tgrasp
