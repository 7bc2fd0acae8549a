#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <utility>

namespace hyperend {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

inline Mat2 mat2(double a, double b, double c, double d) {
  Mat2 m;
  m << a, b, c, d;
  return m;
}

inline Mat2 identity2() { return Mat2::Identity(); }

inline Mat2 symmetrize(const Mat2& m) { return 0.5 * (m + m.transpose()); }

// Max-abs entry, used as a cheap matrix norm for residuals.
inline double max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

inline bool positive_definite(const Mat2& g) {
  return g(0, 0) > 0.0 && g.determinant() > 0.0 && std::isfinite(g.determinant());
}

// Relative asymmetry of g*A, zero iff A is self-adjoint for g.
inline double self_adjoint_defect(const Mat2& g, const Mat2& a) {
  const Mat2 ga = g * a;
  const double scale = std::max(1.0, max_abs(ga));
  return std::abs(ga(0, 1) - ga(1, 0)) / scale;
}

// Real eigenvalues (larger first) of an operator self-adjoint for a metric.
inline std::pair<double, double> ordered_eigenvalues(const Mat2& a) {
  const double tr = a.trace();
  const double det = a.determinant();
  const double disc = std::max(0.0, 0.25 * tr * tr - det);
  const double s = std::sqrt(disc);
  return {0.5 * tr + s, 0.5 * tr - s};
}

// Trace of a bilinear form with respect to a metric.
inline double trace_wrt(const Mat2& g, const Mat2& form) { return (g.inverse() * form).trace(); }

}  // namespace hyperend
