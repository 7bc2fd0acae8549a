#pragma once

#include <cmath>
#include <string>

#include "hyperend/core/error.hpp"
#include "hyperend/core/format.hpp"
#include "hyperend/core/report.hpp"
#include "hyperend/end/end_family.hpp"
#include "hyperend/fields/curvature.hpp"
#include "hyperend/fields/normalized_pair.hpp"

namespace hyperend::foliation {

using end::Side;
using fields::AtlasPtr;
using fields::ChartAtlas;
using fields::MetricField;
using fields::OperatorField;
using fields::ScalarField;

// Induced metric and shape operator of a surface in a hyperbolic end or in its dual spacetime.
struct EmbeddingData {
  MetricField I;
  OperatorField B;
  Side side = Side::hyperbolic;

  const AtlasPtr& atlas() const { return I.atlas(); }
  MetricField III() const { return fields::pullback(I, B, "III"); }
};

inline double dual_curvature(double K) {
  if (!(K > -1.0 && K < 0.0)) {
    throw Error(ErrorKind::out_of_domain, "foliation", "curvature " + num(K) + " outside (-1, 0)");
  }
  return K / (K + 1.0);
}

inline double inverse_dual_curvature(double Kd) {
  if (!(Kd < 0.0)) throw Error(ErrorKind::out_of_domain, "foliation", "dual curvature " + num(Kd) + " must be negative");
  return Kd / (1.0 - Kd);
}

namespace detail {

inline void require_normalized(const MetricField& h, const MetricField& hp, const OperatorField& b) {
  const Report r = fields::verify_normalized_pair(h, hp, b);
  if (!r.all_pass()) {
    std::string what = "normalized pair rejected:";
    for (const auto& it : r.items) {
      if (!it.pass) what += " " + it.name + " (" + it.detail + ")";
    }
    throw Error(ErrorKind::rejected_datum, "foliation", what);
  }
}

}  // namespace detail

// Surface of curvature K in the end: I = h/|K|, B = sqrt(1+K) b.
inline EmbeddingData phi_K_data(const MetricField& h, const MetricField& hp, const OperatorField& b, double K) {
  if (!(K > -1.0 && K < 0.0)) throw Error(ErrorKind::out_of_domain, "foliation", "K must lie in (-1, 0)");
  detail::require_normalized(h, hp, b);
  const double s = std::sqrt(1.0 + K);
  return {MetricField::generate(h.atlas(), "I", [&](std::size_t g) { return Mat2(h[g] / std::abs(K)); }),
          OperatorField::generate(h.atlas(), "B", [&](std::size_t g) { return Mat2(s * b[g]); }), Side::hyperbolic};
}

// Surface of curvature Kd in the dual spacetime: I = h'/|Kd|, B = sqrt(1-Kd) b^-1.
inline EmbeddingData psi_Kd_data(const MetricField& h, const MetricField& hp, const OperatorField& b, double Kd) {
  if (!(Kd < 0.0)) throw Error(ErrorKind::out_of_domain, "foliation", "Kd must be negative");
  detail::require_normalized(h, hp, b);
  const double s = std::sqrt(1.0 - Kd);
  return {MetricField::generate(h.atlas(), "I", [&](std::size_t g) { return Mat2(hp[g] / std::abs(Kd)); }),
          OperatorField::generate(h.atlas(), "B", [&](std::size_t g) { return Mat2(s * b[g].inverse()); }),
          Side::de_sitter};
}

// (I, B) -> (III, B^-1), switching sides.  A hyperbolic input must have
// 0 < det B < 1 (curvature in (-1, 0)), a de Sitter input det B > 1.
inline EmbeddingData dualize_surface(const EmbeddingData& e) {
  const auto& atlas = *e.atlas();
  for (std::size_t g = 0; g < atlas.size(); ++g) {
    if (!atlas.active(g)) continue;
    const double det = e.B[g].determinant();
    if (std::abs(det) < 1e-300) {
      throw Error(ErrorKind::singular_morphism, "foliation", "B is not invertible at " + fields::sample_name(atlas, g));
    }
    const bool ok = e.side == Side::hyperbolic ? (det > 0.0 && det < 1.0) : det > 1.0;
    if (!ok) {
      throw Error(ErrorKind::out_of_domain, "foliation",
                  "det B = " + num(det) + " outside the " + end::to_string(e.side) + " range at " +
                      fields::sample_name(atlas, g));
    }
  }
  const Side other = e.side == Side::hyperbolic ? Side::de_sitter : Side::hyperbolic;
  return {e.III(), OperatorField::generate(e.atlas(), "B", [&](std::size_t g) { return Mat2(e.B[g].inverse()); }),
          other};
}

// Side-appropriate Gauss identity, Codazzi and positivity audit.
inline Report embedding_report(const EmbeddingData& e, double floor = 1e-10) {
  const auto& atlas = *e.atlas();
  std::vector<double> rhs(atlas.size(), 0.0);
  double sa = 0.0, min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < atlas.size(); ++g) {
    if (!atlas.active(g)) continue;
    const double det = e.B[g].determinant();
    rhs[g] = e.side == Side::hyperbolic ? det - 1.0 : 1.0 - det;
    if (atlas.role(g) != fields::SampleRole::owned) continue;
    sa = std::max(sa, self_adjoint_defect(e.I[g], e.B[g]));
    min_eig = std::min(min_eig, ordered_eigenvalues(e.B[g]).second);
  }
  const auto gauss = fields::curvature_refinement(e.I.values(), rhs, e.atlas(), floor);
  const auto cod = fields::codazzi_refinement(e.I, e.B, floor);
  Report r;
  r.items.push_back({"gauss", gauss.pass, gauss.residual_h,
                     "finite-difference K vs Gauss identity: " + fields::fmt(gauss.residual_h) + " at h, " +
                         fields::fmt(gauss.residual_2h) + " at 2h"});
  r.items.push_back({"codazzi", cod.pass, cod.residual_h,
                     "residual " + fields::fmt(cod.residual_h) + " at h, " + fields::fmt(cod.residual_2h) + " at 2h"});
  r.items.push_back({"self_adjoint", sa <= 1e-8, sa, "max self-adjointness defect of B"});
  r.items.push_back({"positive", min_eig > 0.0, min_eig, "smallest principal curvature"});
  return r;
}

// Principal curvature after pushing along the normal flow for time t.
inline double push_principal(double lambda, double t) {
  const double th = std::tanh(t);
  const double den = 1.0 + lambda * th;
  if (std::abs(den) < 1e-14) {
    throw Error(ErrorKind::singular_push, "foliation", "1 + lambda tanh t vanishes for lambda = " + num(lambda));
  }
  return (lambda + th) / den;
}

}  // namespace hyperend::foliation
