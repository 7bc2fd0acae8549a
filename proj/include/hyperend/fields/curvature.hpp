#pragma once

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "hyperend/core/error.hpp"
#include "hyperend/core/linalg.hpp"
#include "hyperend/fields/field.hpp"
#include "hyperend/fields/stencil.hpp"

namespace hyperend::fields {

// Gamma[k](i, j) = Gamma^k_ij from a metric and its coordinate derivatives.
using Christoffel = std::array<Mat2, 2>;

inline Christoffel christoffel(const Mat2& g, const std::array<Mat2, 2>& dg) {
  const Mat2 gi = g.inverse();
  // lowered(l)(i, j) = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
  std::array<Mat2, 2> lowered;
  for (int l = 0; l < 2; ++l) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        lowered[l](i, j) = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
      }
    }
  }
  Christoffel gamma;
  for (int k = 0; k < 2; ++k) gamma[k] = gi(k, 0) * lowered[0] + gi(k, 1) * lowered[1];
  return gamma;
}

struct MetricJet {
  Mat2 g;
  std::array<Mat2, 2> dg;
  std::array<Mat2, 3> ddg;  // d00, d01, d11
};

inline MetricJet metric_jet(const std::vector<Mat2>& g, const Differentiator& d, std::size_t s) {
  MetricJet j;
  j.g = g[s];
  j.dg = {d.d1(g, s, 0), d.d1(g, s, 1)};
  j.ddg = {d.d2(g, s, 0, 0), d.d2(g, s, 0, 1), d.d2(g, s, 1, 1)};
  return j;
}

// Brioschi formula in coordinates (u, v) = (x0, x1).
inline double brioschi(const MetricJet& j) {
  const double E = j.g(0, 0), F = j.g(0, 1), G = j.g(1, 1);
  const double Eu = j.dg[0](0, 0), Ev = j.dg[1](0, 0);
  const double Fu = j.dg[0](0, 1), Fv = j.dg[1](0, 1);
  const double Gu = j.dg[0](1, 1), Gv = j.dg[1](1, 1);
  const double Evv = j.ddg[2](0, 0), Guu = j.ddg[0](1, 1), Fuv = j.ddg[1](0, 1);
  Eigen::Matrix3d m1;
  m1 << -0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev,
      Fv - 0.5 * Gu, E, F,
      0.5 * Gv, F, G;
  Eigen::Matrix3d m2;
  m2 << 0.0, 0.5 * Ev, 0.5 * Gu,
      0.5 * Ev, E, F,
      0.5 * Gu, F, G;
  const double det = E * G - F * F;
  return (m1.determinant() - m2.determinant()) / (det * det);
}

inline std::string sample_name(const ChartAtlas& atlas, std::size_t g) {
  const SampleRef s = atlas.locate(g);
  return "chart " + std::to_string(atlas.charts()[s.chart].id) + " index (" + std::to_string(s.i) + ", " +
         std::to_string(s.j) + ")";
}

inline void require_positive_definite(const MetricField& g) {
  const ChartAtlas& atlas = *g.atlas();
  for (std::size_t s = 0; s < atlas.size(); ++s) {
    if (atlas.active(s) && !positive_definite(g[s])) {
      throw Error(ErrorKind::non_positive_definite, "surface_fields",
                  "metric '" + g.role() + "' is not positive definite at " + sample_name(atlas, s));
    }
  }
}

// Runs fn at owned samples (which must carry stencils) and interpolates the fringe.
template <class Tag, class V, class Fn>
Field<Tag, V> derived_field(const AtlasPtr& atlas, const Differentiator& d, std::string role, Fn&& fn) {
  std::vector<V> values(atlas->size(), Tag::zero());
  for (std::size_t s = 0; s < atlas->size(); ++s) {
    if (atlas->role(s) != SampleRole::owned) continue;
    if (!d.valid(s)) {
      throw Error(ErrorKind::atlas_mismatch, "surface_fields",
                  "no finite-difference stencil at " + sample_name(*atlas, s));
    }
    values[s] = fn(s);
  }
  fill_fringe<Tag, V>(values, *atlas);
  return Field<Tag, V>(atlas, std::move(role), std::move(values));
}

inline ScalarField gauss_curvature(const MetricField& g, const Differentiator& d) {
  require_positive_definite(g);
  return derived_field<ScalarTag, double>(g.atlas(), d, "K", [&](std::size_t s) {
    return brioschi(metric_jet(g.values(), d, s));
  });
}

// Fourth-order stencils by default; second order is kept for refinement audits.
inline ScalarField gauss_curvature(const MetricField& g, int step = 1, int order = 4) {
  return gauss_curvature(g, Differentiator(g.atlas(), step, order));
}

// g(A., A.) as a bilinear form.
inline Mat2 pullback(const Mat2& g, const Mat2& a) { return a.transpose() * g * a; }

inline MetricField pullback(const MetricField& g, const OperatorField& a, std::string role) {
  require_same_atlas(g.atlas(), a.atlas());
  return MetricField::generate(g.atlas(), std::move(role), [&](std::size_t s) { return pullback(g[s], a[s]); });
}

// Curvature of h = g(A., A.) for a Codazzi morphism A: K_h = K_g / det A.
inline ScalarField curvature_via_morphism(const MetricField& g, const OperatorField& a, int step = 1,
                                          int order = 4) {
  require_same_atlas(g.atlas(), a.atlas());
  const ChartAtlas& atlas = *g.atlas();
  for (std::size_t s = 0; s < atlas.size(); ++s) {
    if (atlas.active(s) && std::abs(a[s].determinant()) < 1e-300) {
      throw Error(ErrorKind::singular_morphism, "surface_fields", "det A vanishes at " + sample_name(atlas, s));
    }
  }
  ScalarField k = gauss_curvature(g, step, order);
  for (std::size_t s = 0; s < atlas.size(); ++s) {
    if (atlas.active(s)) k[s] /= a[s].determinant();
  }
  k.set_role("K_h");
  return k;
}

// |d^nabla A| at one sample, normalised by the area form of g.
inline double codazzi_norm(const std::vector<Mat2>& g, const std::vector<Mat2>& a, const Differentiator& d,
                           std::size_t s) {
  const std::array<Mat2, 2> dg{d.d1(g, s, 0), d.d1(g, s, 1)};
  const Christoffel gamma = christoffel(g[s], dg);
  const Mat2 da0 = d.d1(a, s, 0);
  const Mat2 da1 = d.d1(a, s, 1);
  Vec2 r;
  for (int k = 0; k < 2; ++k) {
    double v = da0(k, 1) - da1(k, 0);
    for (int m = 0; m < 2; ++m) v += gamma[k](0, m) * a[s](m, 1) - gamma[k](1, m) * a[s](m, 0);
    r[k] = v;
  }
  const double q = r.dot(g[s] * r);
  return std::sqrt(std::max(0.0, q)) / std::sqrt(g[s].determinant());
}

inline ScalarField codazzi_residual(const MetricField& g, const OperatorField& a, const Differentiator& d) {
  require_same_atlas(g.atlas(), a.atlas());
  return derived_field<ScalarTag, double>(g.atlas(), d, "codazzi", [&](std::size_t s) {
    return codazzi_norm(g.values(), a.values(), d, s);
  });
}

inline ScalarField codazzi_residual(const MetricField& g, const OperatorField& a, int step = 1) {
  return codazzi_residual(g, a, Differentiator(g.atlas(), step));
}

// Samples used by refinement audits: owned, and on cone charts at least eight
// rings away from the excluded disk so that the stencil is resolved.
inline bool audit_sample(const ChartAtlas& atlas, std::size_t g) {
  if (atlas.role(g) != SampleRole::owned) return false;
  const SampleRef s = atlas.locate(g);
  return atlas.charts()[s.chart].kind == ChartKind::rect || s.i >= 8;
}

// Step-doubling audit: a residual that is pure truncation error grows by ~4
// when the stencil step doubles; a genuine defect does not.
struct RefinementAudit {
  double residual_h = 0.0;
  double residual_2h = 0.0;
  double ratio = 0.0;
  bool pass = false;
};

inline RefinementAudit codazzi_refinement(const std::vector<Mat2>& g, const std::vector<Mat2>& a,
                                          const AtlasPtr& atlas, double floor) {
  const Differentiator d1(atlas, 1);
  const Differentiator d2(atlas, 2);
  RefinementAudit out;
  for (std::size_t s = 0; s < atlas->size(); ++s) {
    if (!audit_sample(*atlas, s) || !d1.valid(s) || !d2.valid(s)) continue;
    out.residual_h = std::max(out.residual_h, codazzi_norm(g, a, d1, s));
    out.residual_2h = std::max(out.residual_2h, codazzi_norm(g, a, d2, s));
  }
  out.ratio = out.residual_h > 0.0 ? out.residual_2h / out.residual_h : 0.0;
  out.pass = out.residual_h <= floor || out.ratio >= 2.0;
  return out;
}

inline RefinementAudit codazzi_refinement(const MetricField& g, const OperatorField& a, double floor = 1e-10) {
  require_same_atlas(g.atlas(), a.atlas());
  return codazzi_refinement(g.values(), a.values(), g.atlas(), floor);
}

// Step-doubling audit of second-order Brioschi curvature against an expected field.
inline RefinementAudit curvature_refinement(const std::vector<Mat2>& g, const std::vector<double>& expected,
                                            const AtlasPtr& atlas, double floor) {
  const Differentiator d1(atlas, 1);
  const Differentiator d2(atlas, 2);
  RefinementAudit out;
  for (std::size_t s = 0; s < atlas->size(); ++s) {
    if (!audit_sample(*atlas, s) || !d1.valid(s) || !d2.valid(s)) continue;
    out.residual_h = std::max(out.residual_h, std::abs(brioschi(metric_jet(g, d1, s)) - expected[s]));
    out.residual_2h = std::max(out.residual_2h, std::abs(brioschi(metric_jet(g, d2, s)) - expected[s]));
  }
  out.ratio = out.residual_h > 0.0 ? out.residual_2h / out.residual_h : 0.0;
  out.pass = out.residual_h <= floor || out.ratio >= 2.0;
  return out;
}

// Ordered eigenvalues (lambda >= mu) of an operator self-adjoint for g.
inline std::pair<ScalarField, ScalarField> eigenvalue_fields(const MetricField& g, const OperatorField& a,
                                                             double tol = 1e-8) {
  require_same_atlas(g.atlas(), a.atlas());
  const ChartAtlas& atlas = *g.atlas();
  std::vector<double> lam(atlas.size(), 0.0), mu(atlas.size(), 0.0);
  for (std::size_t s = 0; s < atlas.size(); ++s) {
    if (!atlas.active(s)) continue;
    if (self_adjoint_defect(g[s], a[s]) > tol) {
      throw Error(ErrorKind::not_self_adjoint, "surface_fields",
                  "operator '" + a.role() + "' is not self-adjoint at " + sample_name(atlas, s));
    }
    std::tie(lam[s], mu[s]) = ordered_eigenvalues(a[s]);
  }
  return {ScalarField(g.atlas(), "lambda", std::move(lam)), ScalarField(g.atlas(), "mu", std::move(mu))};
}

// Quadrature of the area form over the atlas.
inline double area(const MetricField& g) {
  const ChartAtlas& atlas = *g.atlas();
  double total = 0.0;
  for (std::size_t s = 0; s < atlas.size(); ++s) {
    const double w = atlas.weights()[s];
    if (w != 0.0) total += w * std::sqrt(g[s].determinant());
  }
  return total;
}

}  // namespace hyperend::fields
