#pragma once

#include <cmath>

#include "hyperend/fixtures/genus2.hpp"
#include "hyperend/grafting/holonomy.hpp"

namespace hyperend::fixtures {

using grafting::Crossing;
using grafting::HolonomyRep;
using grafting::MeasuredCurve;
using grafting::MeasuredMulticurve;
using grafting::RepKind;
using grafting::SurfaceGroupPresentation;
using grafting::Word;

// Fuchsian torus with one cone point: tr a = tr b = tr ab = x with
// 3x^2 - x^3 - 2 = tr [a,b] = -2 cos(theta/2), c = [a,b]^-1.
inline HolonomyRep torus_representation(double theta) {
  if (!(theta > 0.0 && theta < 2.0 * M_PI)) {
    throw Error(ErrorKind::out_of_domain, "fixtures", "cone angle must lie in (0, 2pi)");
  }
  const double target = -2.0 * std::cos(0.5 * theta);
  double lo = 2.0, hi = 3.0;  // 3x^2 - x^3 - 2 decreases from 2 to -2 here
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (3.0 * mid * mid - mid * mid * mid - 2.0 > target ? lo : hi) = mid;
  }
  const double x = 0.5 * (lo + hi);
  const double lam = 0.5 * (x + std::sqrt(x * x - 4.0));
  const double p = x / (lam + 1.0), s = x * lam / (lam + 1.0);
  const MoebiusMap a(lam, 0.0, 0.0, 1.0 / lam);
  const MoebiusMap b(p, 1.0, p * s - 1.0, s);
  const MoebiusMap c = (a * b * a.inverse() * b.inverse()).inverse();
  return {SurfaceGroupPresentation(1, {"c"}), {a, b, c}, {theta}, RepKind::fuchsian};
}

// Curve a with weight t.  b crosses its axis once; the cone loop crosses the
// lifts along a and along c a.
inline MeasuredMulticurve torus_multicurve(const SurfaceGroupPresentation& p, double t) {
  MeasuredCurve a{p.parse("a1"), t, {}};
  a.crossings.push_back({p.index("b1"), 0.5, 1, {}});
  a.crossings.push_back({p.index("c"), 0.25, 1, {}});
  a.crossings.push_back({p.index("c"), 0.75, -1, p.parse("c")});
  return {{a}};
}

inline HolonomyRep genus2_representation() {
  const Genus2Holonomy h = genus2_holonomy();
  return {SurfaceGroupPresentation(2, {"c"}), {h.a1, h.b1, h.a2, h.b2, h.c}, {octagon::cone_angle}, RepKind::fuchsian};
}

// Weighted curves a1 and a2 (either weight may be zero to drop the curve).
// Each is pushed off to the side of the basepoint where it meets only the
// incoming end of its dual generator, so the lift crossed is b a, not a.
inline MeasuredMulticurve genus2_multicurve(const SurfaceGroupPresentation& p, double t1, double t2) {
  MeasuredMulticurve m;
  if (t1 > 0.0) m.curves.push_back({p.parse("a1"), t1, {{p.index("b1"), 0.9, 1, p.parse("b1")}}});
  if (t2 > 0.0) m.curves.push_back({p.parse("a2"), t2, {{p.index("b2"), 0.9, 1, p.parse("b2")}}});
  return m;
}

}  // namespace hyperend::fixtures
