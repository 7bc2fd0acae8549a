#pragma once

#include <cmath>
#include <complex>
#include <memory>

#include "hyperend/fields/field.hpp"

namespace hyperend::fixtures {

using fields::AtlasPtr;
using fields::Chart;
using fields::ChartAtlas;
using fields::MetricField;

// Single rectangular chart [x0, x1] x [y0, y1] with spacing h.
inline AtlasPtr rect_patch(double x0, double x1, double y0, double y1, double h, int id = 0) {
  const int nx = static_cast<int>(std::lround((x1 - x0) / h)) + 1;
  const int ny = static_cast<int>(std::lround((y1 - y0) / h)) + 1;
  return std::make_shared<const ChartAtlas>(std::vector<Chart>{Chart::rect(id, {x0, y0}, {h, h}, {nx, ny})});
}

// Square patch of the Poincare disk centred at 0 with half-width `half`.
inline AtlasPtr disk_patch(double half, double h) { return rect_patch(-half, half, -half, half, h); }

inline std::complex<double> chart_point(const ChartAtlas& atlas, std::size_t g) {
  const auto c = atlas.coord(g);
  return {c[0], c[1]};
}

// Poincare disk metric 4|dz|^2/(1-|z|^2)^2, curvature -1.
inline Mat2 poincare_metric(std::complex<double> z) {
  const double rho = 4.0 / std::pow(1.0 - std::norm(z), 2);
  return rho * Mat2::Identity();
}

inline MetricField poincare_field(const AtlasPtr& atlas, const std::string& role = "I*") {
  return MetricField::generate(atlas, role, [&](std::size_t g) { return poincare_metric(chart_point(*atlas, g)); });
}

// Geodesic polar annulus of the hyperbolic cone of angle theta.
inline AtlasPtr cone_chart(double theta, double r_min, double r_max, int n_r, int n_alpha, int id = 0) {
  return std::make_shared<const ChartAtlas>(
      std::vector<Chart>{Chart::polar(id, r_min, r_max, n_r, n_alpha, theta)});
}

// dr^2 + sinh^2(r) dalpha^2 on every polar chart.
inline MetricField cone_metric_field(const AtlasPtr& atlas, const std::string& role = "I*") {
  return MetricField::generate(atlas, role, [&](std::size_t g) {
    const double r = atlas->coord(g)[0];
    return mat2(1.0, 0.0, 0.0, std::sinh(r) * std::sinh(r));
  });
}

// Conformal coordinate z = tanh(r/2)^(2pi/theta) e^(2 pi i alpha/theta) of a cone chart.
inline std::complex<double> cone_coordinate(double r, double alpha, double theta) {
  const double k = 2.0 * M_PI / theta;
  return std::polar(std::pow(std::tanh(0.5 * r), k), k * alpha);
}

// Jacobian of (r, alpha) -> (Re z, Im z).
inline Mat2 cone_coordinate_jacobian(double r, double alpha, double theta) {
  const double k = 2.0 * M_PI / theta;
  const double t = std::tanh(0.5 * r);
  const double mod = std::pow(t, k);
  // d mod/dr = k t^(k-1) * (1 - t^2)/2
  const double dmod = k * std::pow(t, k - 1.0) * 0.5 * (1.0 - t * t);
  const double c = std::cos(k * alpha), s = std::sin(k * alpha);
  return mat2(dmod * c, -mod * k * s, dmod * s, mod * k * c);
}

}  // namespace hyperend::fixtures
