#pragma once

#include <vector>

namespace tgrasp {

struct OgdenTerm {
  double mu;     // stress units (MPa for the fitted TPU)
  double alpha;  // dimensionless
};

/// N-term Ogden hyperelastic parameter set.
struct OgdenParams {
  std::vector<OgdenTerm> terms;

  /// Three-term fit of the NinjaFlex TPU finger material.
  static OgdenParams ninjaflex();

  /// Ground-state shear modulus, sum(mu_i * alpha_i) / 2.
  double shear_modulus() const;

  /// Throws ArgumentError unless sum(mu_i * alpha_i) > 0 and every alpha != 0.
  void validate() const;
};

/// Nominal (first Piola-Kirchhoff) stress of an incompressible Ogden solid in
/// uniaxial tension at stretch `lambda`:
///   P = sum_i (2 mu_i / alpha_i) (lambda^(alpha_i - 1) - lambda^(-alpha_i/2 - 1))
/// Throws ArgumentError for lambda <= 0.
double ogden_uniaxial_nominal_stress(double lambda, const OgdenParams& params);

}  // namespace tgrasp
