#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "hyperend/core/error.hpp"
#include "hyperend/core/format.hpp"
#include "hyperend/core/report.hpp"
#include "hyperend/fields/curvature.hpp"
#include "hyperend/fields/normalized_pair.hpp"
#include "hyperend/infinity/infinity_data.hpp"

namespace hyperend::end {

using fields::AtlasPtr;
using fields::MetricField;
using fields::OperatorField;
using fields::ScalarField;
using infinity::InfinityData;

enum class Side { hyperbolic, de_sitter };

inline std::string to_string(Side s) { return s == Side::hyperbolic ? "hyperbolic" : "deSitter"; }

// Thrown when a datum fails condition (*); carries the report.
class RejectedDatum : public Error {
 public:
  explicit RejectedDatum(Report report)
      : Error(ErrorKind::rejected_datum, "end_family", summary(report)), report_(std::move(report)) {}
  const Report& report() const noexcept { return report_; }

 private:
  static std::string summary(const Report& r) {
    std::string s = "condition (*) failed:";
    for (const auto& it : r.items) {
      if (!it.pass) s += " " + it.name + " (" + it.detail + ")";
    }
    return s;
  }
  Report report_;
};

struct Leaf {
  MetricField I;
  OperatorField B;
  MetricField II;
};

// Equidistant surfaces of the end (or of the dual de Sitter spacetime), evaluated
// from closed forms in the datum.  The Gauss map identifies every leaf with the
// atlas of the datum, so leaf fields share sample indices with I*.
class EndFamily {
 public:
  EndFamily(Side side, InfinityData datum, double lower, double upper)
      : side_(side), datum_(std::move(datum)), lower_(lower), upper_(upper) {}

  Side side() const noexcept { return side_; }
  const InfinityData& datum() const noexcept { return datum_; }
  const AtlasPtr& atlas() const { return datum_.atlas(); }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

  // +1 on the hyperbolic side, -1 on the de Sitter side.
  double sign() const noexcept { return side_ == Side::hyperbolic ? 1.0 : -1.0; }

  // e^p E + s e^-p B*
  Mat2 flow(std::size_t g, double p) const {
    return Mat2(std::exp(p) * Mat2::Identity() + sign() * std::exp(-p) * datum_.Bstar[g]);
  }
  // e^p E - s e^-p B*
  Mat2 coflow(std::size_t g, double p) const {
    return Mat2(std::exp(p) * Mat2::Identity() - sign() * std::exp(-p) * datum_.Bstar[g]);
  }

  Mat2 I(std::size_t g, double p) const { return Mat2(0.5 * fields::pullback(datum_.Istar[g], flow(g, p))); }

  Mat2 B(std::size_t g, double p) const {
    const Mat2 f = flow(g, p);
    if (std::abs(f.determinant()) < 1e-14 * std::exp(2.0 * p)) {
      throw Error(ErrorKind::singular_leaf, "end_family",
                  "leaf at " + num(p) + " degenerates at " + fields::sample_name(*atlas(), g));
    }
    return Mat2(f.inverse() * coflow(g, p));
  }

  // II = I(B., .) = 1/2 (e^{2p} I* - e^{-2p} III*)
  Mat2 II(std::size_t g, double p) const {
    return Mat2(0.5 * (std::exp(2.0 * p) * datum_.Istar[g] - std::exp(-2.0 * p) * datum_.IIIstar(g)));
  }

  Mat2 III(std::size_t g, double p) const { return fields::pullback(I(g, p), B(g, p)); }

  // Gauss curvature of the leaf from the datum alone.
  double curvature(std::size_t g, double p) const {
    const double tr = datum_.Bstar[g].trace(), det = datum_.Bstar[g].determinant();
    return -2.0 * tr / (std::exp(2.0 * p) + sign() * tr + std::exp(-2.0 * p) * det);
  }

  // Gauss equation of the leaf: -1 + det B (hyperbolic) or 1 - det B (de Sitter).
  double gauss_rhs(std::size_t g, double p) const {
    const double det = B(g, p).determinant();
    return side_ == Side::hyperbolic ? det - 1.0 : 1.0 - det;
  }

  // Ambient metric eps dp^2 + I_p in coordinates (p, x0, x1).
  Eigen::Matrix3d ambient_metric(std::size_t g, double p) const {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    m(0, 0) = sign();
    m.block<2, 2>(1, 1) = I(g, p);
    return m;
  }

  Leaf leaf(double p) const {
    const AtlasPtr& a = atlas();
    return {MetricField::generate(a, "I_" + num(p), [&](std::size_t g) { return I(g, p); }),
            OperatorField::generate(a, "B_" + num(p), [&](std::size_t g) { return B(g, p); }),
            MetricField::generate(a, "II_" + num(p), [&](std::size_t g) { return II(g, p); })};
  }

 private:
  Side side_;
  InfinityData datum_;
  double lower_;
  double upper_;
};

inline EndFamily build_family(const InfinityData& d, Side side, double upper = 20.0,
                              const infinity::StarTolerances& tol = {}) {
  Report star = infinity::condition_star_report(d, tol);
  if (!star.all_pass()) throw RejectedDatum(std::move(star));
  return EndFamily(side, d, 0.0, upper);
}

// Closed-form leaf eigenvalue for an eigenvalue l of B*.
inline double leaf_eigenvalue(Side side, double l, double p) {
  const double s = side == Side::hyperbolic ? 1.0 : -1.0;
  const double num_ = std::exp(p) - s * std::exp(-p) * l;
  const double den = std::exp(p) + s * std::exp(-p) * l;
  if (std::abs(den) < 1e-14 * std::exp(p)) {
    throw Error(ErrorKind::singular_leaf, "end_family", "vanishing denominator at parameter " + num(p));
  }
  return num_ / den;
}

inline std::pair<ScalarField, ScalarField> eigenvalues_at(const EndFamily& f, double p) {
  const AtlasPtr& atlas = f.atlas();
  std::vector<double> lam(atlas->size(), 0.0), mu(atlas->size(), 0.0);
  for (std::size_t g = 0; g < atlas->size(); ++g) {
    if (!atlas->active(g)) continue;
    const auto [ls, ms] = ordered_eigenvalues(f.datum().Bstar[g]);
    double a, b;
    try {
      a = leaf_eigenvalue(f.side(), ls, p);
      b = leaf_eigenvalue(f.side(), ms, p);
    } catch (const Error&) {
      throw Error(ErrorKind::singular_leaf, "end_family",
                  "leaf at " + num(p) + " degenerates at " + fields::sample_name(*atlas, g));
    }
    lam[g] = std::max(a, b);
    mu[g] = std::min(a, b);
  }
  return {ScalarField(atlas, "lambda", std::move(lam)), ScalarField(atlas, "mu", std::move(mu))};
}

namespace detail {

// Smallest leaf eigenvalue over owned samples; -inf where the leaf degenerates.
inline double min_eigenvalue(const EndFamily& f, double p) {
  const auto& atlas = *f.atlas();
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < atlas.size(); ++g) {
    if (atlas.role(g) != fields::SampleRole::owned) continue;
    if (f.flow(g, p).determinant() <= 0.0) return -std::numeric_limits<double>::infinity();
    const auto [ls, ms] = ordered_eigenvalues(f.datum().Bstar[g]);
    m = std::min({m, leaf_eigenvalue(f.side(), ls, p), leaf_eigenvalue(f.side(), ms, p)});
  }
  return m;
}

inline bool convex(const EndFamily& f, double p) {
  try {
    return min_eigenvalue(f, p) >= 1e-8;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace detail

// Smallest parameter past which every leaf eigenvalue is positive: a log-spaced
// scan of 32 points followed by bisection to 1e-10.  Eigenvalues of the closed
// forms are monotone in the parameter, so the first positive grid point brackets
// the root.
inline double convexity_threshold(const EndFamily& f) {
  const double a = f.lower(), span = f.upper() - f.lower();
  if (detail::convex(f, a)) return a;
  double lo = a, hi = a;
  bool found = false;
  for (int k = 1; k < 32; ++k) {
    const double p = a + std::expm1(std::log1p(span) * k / 31.0);
    if (detail::convex(f, p)) {
      hi = p;
      found = true;
      break;
    }
    lo = p;
  }
  if (!found) {
    throw Error(ErrorKind::out_of_domain, "end_family", "no convex leaf up to parameter " + num(f.upper()));
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (detail::convex(f, mid) ? hi : lo) = mid;
  }
  return hi;
}

// (I*, II*) from the leaf at parameter p:
// hyperbolic I* = 1/2 e^{-2r}(I + 2II + III), II* = 1/2 (I - III);
// de Sitter I* = 1/2 e^{-2t}(I + 2II + III), II* = 1/2 (III - I).
inline InfinityData recover_infinity_data(const EndFamily& f, double p) {
  const AtlasPtr& atlas = f.atlas();
  const double e = 0.5 * std::exp(-2.0 * p);
  MetricField Is = MetricField::generate(atlas, "I*", [&](std::size_t g) {
    return Mat2(e * (f.I(g, p) + 2.0 * f.II(g, p) + f.III(g, p)));
  });
  MetricField IIs = MetricField::generate(atlas, "II*", [&](std::size_t g) {
    return Mat2(0.5 * f.sign() * (f.I(g, p) - f.III(g, p)));
  });
  return infinity::assemble(std::move(Is), std::move(IIs), f.datum().K);
}

// Gauss and Codazzi audit of the leaf at p.
inline Report leaf_report(const EndFamily& f, double p, double floor = 1e-10) {
  const Leaf leaf = f.leaf(p);
  const auto& atlas = *f.atlas();
  double sa = 0.0, closed = 0.0;
  std::vector<double> rhs(atlas.size(), 0.0);
  for (std::size_t g = 0; g < atlas.size(); ++g) {
    if (!atlas.active(g)) continue;
    rhs[g] = f.gauss_rhs(g, p);
    if (atlas.role(g) != fields::SampleRole::owned) continue;
    sa = std::max(sa, self_adjoint_defect(leaf.I[g], leaf.B[g]));
    closed = std::max(closed, std::abs(rhs[g] - f.curvature(g, p)) / std::max(1.0, std::abs(rhs[g])));
  }
  const auto gauss = fields::curvature_refinement(leaf.I.values(), rhs, f.atlas(), floor);
  const auto cod = fields::codazzi_refinement(leaf.I, leaf.B, floor);
  Report r;
  r.items.push_back({"self_adjoint", sa <= 1e-8, sa, "max self-adjointness defect of B"});
  r.items.push_back({"gauss_closed_form", closed <= 1e-10, closed, "Gauss identity against the closed form"});
  r.items.push_back({"gauss_curvature", gauss.pass, gauss.residual_h,
                     "finite-difference K vs Gauss identity: " + fields::fmt(gauss.residual_h) + " at h, " +
                         fields::fmt(gauss.residual_2h) + " at 2h"});
  r.items.push_back({"codazzi", cod.pass, cod.residual_h,
                     "residual " + fields::fmt(cod.residual_h) + " at h, " + fields::fmt(cod.residual_2h) + " at 2h"});
  return r;
}

// Per-sample leaf dump over owned samples.
inline std::string leaf_csv(const EndFamily& f, double p) {
  const auto& atlas = *f.atlas();
  const Leaf leaf = f.leaf(p);
  const ScalarField kfd = fields::gauss_curvature(leaf.I);
  const auto [lam, mu] = eigenvalues_at(f, p);
  std::ostringstream out;
  out << "chart_id,i,j,param,K,lambda,mu,det_B,gauss_residual\n";
  for (std::size_t g = 0; g < atlas.size(); ++g) {
    if (atlas.role(g) != fields::SampleRole::owned) continue;
    const auto s = atlas.locate(g);
    const double k = f.curvature(g, p);
    out << atlas.charts()[s.chart].id << ',' << s.i << ',' << s.j << ',' << num(p) << ',' << num(k) << ','
        << num(lam[g]) << ',' << num(mu[g]) << ',' << num(leaf.B[g].determinant()) << ','
        << num(std::abs(kfd[g] - k)) << '\n';
  }
  return out.str();
}

}  // namespace hyperend::end
