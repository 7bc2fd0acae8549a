#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "hyperend/core/error.hpp"
#include "hyperend/core/report.hpp"
#include "hyperend/fields/curvature.hpp"
#include "hyperend/fields/normalized_pair.hpp"
#include "hyperend/infinity/quad_diff.hpp"

namespace hyperend::infinity {

using fields::MetricField;
using fields::OperatorField;
using fields::ScalarField;

// Data at infinity (I*, II*) with B* = (I*)^-1 II* and the curvature of I*.
struct InfinityData {
  MetricField Istar;
  MetricField IIstar;
  OperatorField Bstar;
  ScalarField K;

  const AtlasPtr& atlas() const { return Istar.atlas(); }

  // III* = I*(B*., B*.)
  Mat2 IIIstar(std::size_t g) const { return fields::pullback(Istar[g], Bstar[g]); }
};

inline InfinityData assemble(MetricField I, MetricField II, ScalarField K) {
  fields::require_same_atlas(I.atlas(), II.atlas());
  fields::require_same_atlas(I.atlas(), K.atlas());
  fields::require_positive_definite(I);
  I.set_role("I*");
  II.set_role("II*");
  K.set_role("K_I*");
  OperatorField B = OperatorField::generate(I.atlas(), "B*", [&](std::size_t g) { return Mat2(I[g].inverse() * II[g]); });
  return {std::move(I), std::move(II), std::move(B), std::move(K)};
}

// II* = 1/2 I* + Re q for a hyperbolic I*.
inline InfinityData data_from_qd(const MetricField& Istar, const QuadDiff& q) {
  fields::require_same_atlas(Istar.atlas(), q.f.atlas());
  require_at_worst_simple_poles(q);
  MetricField II = MetricField::generate(Istar.atlas(), "II*", [&](std::size_t g) {
    return Mat2(0.5 * Istar[g] + real_part_form(q, g));
  });
  return assemble(Istar, std::move(II), ScalarField(Istar.atlas(), "K_I*", -1.0));
}

struct StarTolerances {
  double trace = 1e-8;
  double det_bound = 1e6;
  double refinement_floor = 1e-10;
};

// Codazzi consistency, trace identity tr II* = -K and boundedness of det B*.
inline Report condition_star_report(const InfinityData& d, const StarTolerances& tol = {}) {
  const ChartAtlas& atlas = *d.atlas();
  double trace = 0.0;
  double det_sup = 0.0;
  bool finite = true;
  for (std::size_t g = 0; g < atlas.size(); ++g) {
    if (atlas.role(g) != fields::SampleRole::owned) continue;
    trace = std::max(trace, std::abs(d.Bstar[g].trace() + d.K[g]));
    const double det = std::abs(d.Bstar[g].determinant());
    finite = finite && std::isfinite(det);
    det_sup = std::max(det_sup, det);
  }

  // The carried curvature is cross-checked against the Brioschi curvature of I*.
  const fields::RefinementAudit curv = fields::curvature_refinement(d.Istar.values(), d.K.values(), d.atlas(), 1e-8);

  const fields::RefinementAudit cod = fields::codazzi_refinement(d.Istar, d.Bstar, tol.refinement_floor);
  Report r;
  r.items.push_back({"codazzi", cod.pass, cod.residual_h,
                     "residual " + fields::fmt(cod.residual_h) + " at h, " + fields::fmt(cod.residual_2h) + " at 2h"});
  r.items.push_back({"trace_identity", trace <= tol.trace && curv.pass, trace,
                     "max |tr B* + K|; carried K vs finite-difference K: " + fields::fmt(curv.residual_h) + " at h, " +
                         fields::fmt(curv.residual_2h) + " at 2h"});
  r.items.push_back({"det_bound", finite && det_sup <= tol.det_bound, det_sup, "sup |det B*|"});
  return r;
}

namespace detail {

// Derivatives of u at g from differences u_b - u_g, exact zero for constant u.
inline double diff(const fields::WeightList& w, const std::vector<double>& u, std::size_t g) {
  double acc = 0.0;
  for (const auto& [b, wt] : w) acc += wt * (u[b] - u[g]);
  return acc;
}

}  // namespace detail

// Equivalent datum under the conformal change I2 = e^{2u} I1:
// II2 = II1 + Hess u - du (x) du + 1/2 |du|^2 I1, K2 = e^{-2u}(K1 - Lap u).
// Derivatives of u and of I1 use fourth-order stencils.
inline InfinityData gauge_transform(const InfinityData& d, const ScalarField& u) {
  fields::require_same_atlas(d.atlas(), u.atlas());
  const AtlasPtr& atlas = d.atlas();
  const fields::Differentiator D(atlas, 1, 4);
  std::vector<Mat2> I2(atlas->size(), Mat2::Zero()), II2(atlas->size(), Mat2::Zero());
  std::vector<double> K2(atlas->size(), 0.0);
  for (std::size_t g = 0; g < atlas->size(); ++g) {
    if (!atlas->active(g)) continue;
    I2[g] = std::exp(2.0 * u[g]) * d.Istar[g];
    if (atlas->role(g) != fields::SampleRole::owned) continue;
    if (!D.valid(g)) {
      throw Error(ErrorKind::atlas_mismatch, "infinity_data", "no stencil at " + fields::sample_name(*atlas, g));
    }
    const auto& st = D.at(g);
    const Vec2 du(detail::diff(st.d1[0], u.values(), g), detail::diff(st.d1[1], u.values(), g));
    Mat2 hess;
    hess(0, 0) = detail::diff(st.d2[0], u.values(), g);
    hess(0, 1) = hess(1, 0) = detail::diff(st.d2[1], u.values(), g);
    hess(1, 1) = detail::diff(st.d2[2], u.values(), g);
    const fields::Christoffel gamma =
        fields::christoffel(d.Istar[g], {D.d1(d.Istar.values(), g, 0), D.d1(d.Istar.values(), g, 1)});
    for (int m = 0; m < 2; ++m) hess -= gamma[m] * du[m];
    const Mat2 gi = d.Istar[g].inverse();
    const double du2 = du.dot(gi * du);
    const double lap = (gi * hess).trace();
    II2[g] = d.IIstar[g] + hess - du * du.transpose() + 0.5 * du2 * d.Istar[g];
    K2[g] = std::exp(-2.0 * u[g]) * (d.K[g] - lap);
  }
  fields::fill_fringe<fields::MetricTag, Mat2>(II2, *atlas);
  fields::fill_fringe<fields::ScalarTag, double>(K2, *atlas);
  return assemble(MetricField(atlas, "I*", std::move(I2)), MetricField(atlas, "II*", std::move(II2)),
                  ScalarField(atlas, "K_I*", std::move(K2)));
}

// Largest relative difference between two data on the same atlas (owned samples).
inline double datum_distance(const InfinityData& a, const InfinityData& b) {
  fields::require_same_atlas(a.atlas(), b.atlas());
  const ChartAtlas& atlas = *a.atlas();
  double m = 0.0;
  for (std::size_t g = 0; g < atlas.size(); ++g) {
    if (atlas.role(g) != fields::SampleRole::owned) continue;
    const double s = std::max(1.0, max_abs(a.Istar[g]));
    m = std::max({m, max_abs(a.Istar[g] - b.Istar[g]) / s, max_abs(a.IIstar[g] - b.IIstar[g]) / s});
  }
  return m;
}

}  // namespace hyperend::infinity
