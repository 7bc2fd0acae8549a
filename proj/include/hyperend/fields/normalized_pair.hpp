#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "hyperend/core/report.hpp"
#include "hyperend/fields/curvature.hpp"

namespace hyperend::fields {

struct PairTolerances {
  double self_adjoint = 1e-8;
  double determinant = 1e-6;
  double pullback = 1e-6;
  double refinement_floor = 1e-10;
};

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Deviation of both eigenvalues of b from 1, maximised over each of the
// innermost polar rings (innermost first).
inline std::vector<double> ring_deviation(const OperatorField& b, int pos, int rings) {
  const ChartAtlas& atlas = *b.atlas();
  const Chart& c = atlas.charts()[pos];
  std::vector<double> dev;
  for (int i = 0; i < std::min(rings, c.dims[0]); ++i) {
    double m = 0.0;
    for (int j = 0; j < c.dims[1]; ++j) {
      const std::size_t s = atlas.offset(pos) + c.local(i, j);
      if (!atlas.active(s)) continue;
      const auto [l, u] = ordered_eigenvalues(b[s]);
      m = std::max({m, std::abs(l - 1.0), std::abs(u - 1.0)});
    }
    dev.push_back(m);
  }
  return dev;
}

// Checks that (h, h') is a normalized pair with morphism b.
inline Report verify_normalized_pair(const MetricField& h, const MetricField& hp, const OperatorField& b,
                                     const PairTolerances& tol = {}) {
  require_same_atlas(h.atlas(), hp.atlas());
  require_same_atlas(h.atlas(), b.atlas());
  require_positive_definite(h);
  require_positive_definite(hp);
  const ChartAtlas& atlas = *h.atlas();

  double sa = 0.0, det = 0.0, pb = 0.0;
  for (std::size_t s = 0; s < atlas.size(); ++s) {
    if (atlas.role(s) != SampleRole::owned) continue;
    sa = std::max(sa, self_adjoint_defect(h[s], b[s]));
    det = std::max(det, std::abs(b[s].determinant() - 1.0));
    pb = std::max(pb, max_abs(pullback(h[s], b[s]) - hp[s]) / std::max(1.0, max_abs(hp[s])));
  }
  const RefinementAudit cod = codazzi_refinement(h, b, tol.refinement_floor);

  Report r;
  r.items.push_back({"self_adjoint", sa <= tol.self_adjoint, sa, "max asymmetry of h*b"});
  r.items.push_back({"unit_determinant", det <= tol.determinant, det, "max |det b - 1|"});
  r.items.push_back({"codazzi", cod.pass, cod.residual_h,
                     "residual " + fmt(cod.residual_h) + " at h, " + fmt(cod.residual_2h) + " at 2h"});
  r.items.push_back({"pullback", pb <= tol.pullback, pb, "max relative |h(b.,b.) - h'|"});

  ReportItem cone{"cone_limit", true, 0.0, "no cone charts"};
  for (std::size_t pos = 0; pos < atlas.charts().size(); ++pos) {
    if (atlas.charts()[pos].kind != ChartKind::polar) continue;
    const std::vector<double> dev = ring_deviation(b, static_cast<int>(pos), 5);
    bool monotone = true;
    for (std::size_t k = 1; k < dev.size(); ++k) monotone = monotone && dev[k - 1] <= dev[k] + 1e-12;
    // Linear extrapolation of the two innermost rings to the cone point.
    const Chart& c = atlas.charts()[pos];
    const double r0 = c.r_min(), r1 = c.r_min() + c.spacing[0];
    const double limit = std::max(0.0, dev[0] - (dev[1] - dev[0]) / (r1 - r0) * r0);
    const bool ok = monotone && limit <= std::max(1e-6, 0.1 * dev.back());
    cone.value = std::max(cone.value, limit);
    cone.pass = cone.pass && ok;
    cone.detail = "extrapolated eigenvalue deviation at cone point " + fmt(cone.value);
  }
  r.items.push_back(cone);
  return r;
}

}  // namespace hyperend::fields
