#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "hyperend/core/error.hpp"

namespace hyperend::fields {

// Genus and cone angles of a closed surface with marked cone points.
struct ConeSignature {
  int genus = 0;
  std::vector<double> angles;

  // chi(S) + sum(theta_i / 2pi - 1).
  double euler_characteristic() const {
    double chi = 2.0 - 2.0 * genus;
    for (double t : angles) chi += t / (2.0 * std::numbers::pi) - 1.0;
    return chi;
  }

  bool admits_hyperbolic_metric() const { return euler_characteristic() < 0.0; }

  void validate() const {
    if (genus < 0) throw Error(ErrorKind::out_of_domain, "surface_fields", "genus must be nonnegative");
    for (double t : angles) {
      if (!(t > 0.0) || !(t <= std::numbers::pi)) {
        throw Error(ErrorKind::out_of_domain, "surface_fields", "cone angles must lie in (0, pi]");
      }
    }
    if (!admits_hyperbolic_metric()) {
      throw Error(ErrorKind::out_of_domain, "surface_fields",
                  "signature does not carry a hyperbolic cone metric");
    }
  }
};

// Area of a closed surface of constant curvature K < 0 with the given cone angles.
inline double gauss_bonnet_area(const ConeSignature& sig, double K) {
  if (!(K < 0.0)) throw Error(ErrorKind::out_of_domain, "surface_fields", "curvature must be negative");
  sig.validate();
  return 2.0 * std::numbers::pi / std::abs(K) * std::abs(sig.euler_characteristic());
}

}  // namespace hyperend::fields
