#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "hyperend/core/error.hpp"
#include "hyperend/fields/field.hpp"
#include "hyperend/fields/stencil.hpp"

namespace hyperend::infinity {

using fields::AtlasPtr;
using fields::Chart;
using fields::ChartAtlas;
using fields::ChartKind;
using fields::ComplexField;

// q = f(z) dz^2 sampled per chart.  On rect charts z = x + iy; on polar cone
// charts z is the uniformizing coordinate tanh(r/2)^(2pi/theta) e^(2pi i alpha/theta).
struct QuadDiff {
  ComplexField f;
  std::vector<int> pole_orders;  // one per polar chart, in chart order
};

inline std::complex<double> conformal_coordinate(const Chart& c, std::array<double, 2> x) {
  if (c.kind == ChartKind::rect) return {x[0], x[1]};
  const double k = 2.0 * std::numbers::pi / c.period;
  return std::polar(std::pow(std::tanh(0.5 * x[0]), k), k * x[1]);
}

// dz/dx0 and dz/dx1 of the conformal coordinate.
inline std::array<std::complex<double>, 2> conformal_derivatives(const Chart& c, std::array<double, 2> x) {
  if (c.kind == ChartKind::rect) return {std::complex<double>(1.0, 0.0), std::complex<double>(0.0, 1.0)};
  const double k = 2.0 * std::numbers::pi / c.period;
  const double t = std::tanh(0.5 * x[0]);
  const std::complex<double> z = conformal_coordinate(c, x);
  // d/dr log z = k (1 - t^2) / (2 t),  d/dalpha log z = i k
  return {z * (k * (1.0 - t * t) / (2.0 * t)), z * std::complex<double>(0.0, k)};
}

// Re(q) as a bilinear form in chart coordinates.
inline Mat2 real_part_form(std::complex<double> f, const std::array<std::complex<double>, 2>& dz) {
  Mat2 m;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) m(i, j) = std::real(f * dz[i] * dz[j]);
  }
  return m;
}

inline Mat2 real_part_form(const QuadDiff& q, std::size_t g) {
  const ChartAtlas& atlas = *q.f.atlas();
  const auto ref = atlas.locate(g);
  const Chart& c = atlas.charts()[ref.chart];
  return real_part_form(q.f[g], conformal_derivatives(c, c.coord(ref.i, ref.j)));
}

// Builds q from f(z, chart) evaluated in each chart's conformal coordinate.
template <class Fn>
QuadDiff make_quad_diff(const AtlasPtr& atlas, Fn&& fn, std::vector<int> pole_orders = {}) {
  QuadDiff q;
  q.f = ComplexField::generate(atlas, "q", [&](std::size_t g) {
    const auto ref = atlas->locate(g);
    const Chart& c = atlas->charts()[ref.chart];
    return fn(conformal_coordinate(c, c.coord(ref.i, ref.j)), c);
  });
  if (pole_orders.empty()) {
    for (const Chart& c : atlas->charts()) {
      if (c.kind == ChartKind::polar) pole_orders.push_back(0);
    }
  }
  q.pole_orders = std::move(pole_orders);
  return q;
}

struct PoleAudit {
  int chart_id = 0;
  double slope = 0.0;     // d log max|f| / d log|z| over the innermost rings
  int order = 0;          // fitted pole order
  double double_pole = 0.0;  // max |f||z|^2 on the innermost ring
};

// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Ring regression of the pole order at every cone chart.
inline std::vector<PoleAudit> audit_poles(const QuadDiff& q, int rings = 5) {
  const ChartAtlas& atlas = *q.f.atlas();
  std::vector<PoleAudit> out;
  for (std::size_t pos = 0; pos < atlas.charts().size(); ++pos) {
    const Chart& c = atlas.charts()[pos];
    if (c.kind != ChartKind::polar) continue;
    std::vector<double> lx, ly;
    PoleAudit a;
    a.chart_id = c.id;
    for (int i = 0; i < std::min(rings, c.dims[0]); ++i) {
      double m = 0.0;
      for (int j = 0; j < c.dims[1]; ++j) m = std::max(m, std::abs(q.f[atlas.offset(pos) + c.local(i, j)]));
      const double modz = std::abs(conformal_coordinate(c, c.coord(i, 0)));
      if (i == 0) a.double_pole = m * modz * modz;
      lx.push_back(std::log(modz));
      ly.push_back(std::log(std::max(m, 1e-300)));
    }
    const bool vanishing = *std::max_element(ly.begin(), ly.end()) < std::log(1e-250);
    a.slope = vanishing ? 0.0 : fit_slope(lx, ly);
    a.order = std::max(0, static_cast<int>(std::lround(-a.slope)));
    out.push_back(a);
  }
  return out;
}

// Rejects differentials with a pole of order two or more at a cone point.
inline void require_at_worst_simple_poles(const QuadDiff& q) {
  for (int p : q.pole_orders) {
    if (p < 0 || p > 1) {
      throw Error(ErrorKind::invalid_differential, "infinity_data", "declared pole order must be 0 or 1");
    }
  }
  for (const PoleAudit& a : audit_poles(q)) {
    if (a.order >= 2) {
      throw Error(ErrorKind::invalid_differential, "infinity_data",
                  "pole of order " + std::to_string(a.order) + " at cone chart " + std::to_string(a.chart_id));
    }
  }
}

// max |df/dzbar| over owned samples of rect charts.
inline double cauchy_riemann_residual(const QuadDiff& q) {
  const AtlasPtr& atlas = q.f.atlas();
  const fields::Differentiator d(atlas, 1);
  double r = 0.0;
  for (std::size_t g = 0; g < atlas->size(); ++g) {
    if (atlas->role(g) != fields::SampleRole::owned || !d.valid(g)) continue;
    if (atlas->charts()[atlas->locate(g).chart].kind != ChartKind::rect) continue;
    const std::complex<double> fx = d.d1(q.f.values(), g, 0);
    const std::complex<double> fy = d.d1(q.f.values(), g, 1);
    r = std::max(r, 0.5 * std::abs(fx + std::complex<double>(0.0, 1.0) * fy));
  }
  return r;
}

}  // namespace hyperend::infinity
