#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <deque>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "hyperend/core/error.hpp"
#include "hyperend/fields/signature.hpp"
#include "hyperend/fixtures/disk_patch.hpp"
#include "hyperend/geom/moebius.hpp"
#include "hyperend/infinity/infinity_data.hpp"

// Closed genus-2 orbifold with one cone point of angle pi/2, built from the
// regular hyperbolic octagon with interior angles pi/16 and side pairings
// 0<->2, 1<->3, 4<->6, 5<->7.  All eight vertices form one cycle.
namespace hyperend::fixtures {

using geom::MoebiusMap;
using cplx = std::complex<double>;

namespace octagon {

inline constexpr double pi = std::numbers::pi;
inline constexpr double cone_angle = pi / 2.0;

inline double inradius() { return std::acosh(std::cos(pi / 32.0) / std::sin(pi / 8.0)); }
inline double circumradius() { return std::acosh(1.0 / (std::tan(pi / 8.0) * std::tan(pi / 32.0))); }

inline double side_direction(int k) { return 2.0 * pi * k / 8.0; }
inline cplx vertex(int k) { return std::polar(std::tanh(0.5 * circumradius()), (2.0 * k - 1.0) * pi / 8.0); }
// Image of the centre across side k.
inline cplx neighbour_centre(int k) { return std::polar(std::tanh(inradius()), side_direction(k)); }
inline int partner(int k) {
  static constexpr int p[8] = {2, 3, 0, 1, 6, 7, 4, 5};
  return p[((k % 8) + 8) % 8];
}

inline double distance(cplx a, cplx b) { return 2.0 * std::atanh(std::abs(a - b) / std::abs(1.0 - std::conj(a) * b)); }

inline MoebiusMap rotation(double angle) { return MoebiusMap::diagonal(std::polar(1.0, 0.5 * angle)); }

// Translation by d along the diameter in direction phi.
inline MoebiusMap translation(double phi, double d) {
  const MoebiusMap t(std::cosh(0.5 * d), std::sinh(0.5 * d), std::sinh(0.5 * d), std::cosh(0.5 * d));
  return rotation(phi) * t * rotation(-phi);
}

// Maps side i onto side j, carrying the octagon across side j.
inline MoebiusMap pairing(int i, int j) {
  return translation(side_direction(j), 2.0 * inradius()) * rotation(side_direction(j) + pi - side_direction(i));
}

// Disk automorphism sending 0 to v.
inline MoebiusMap centre_at(cplx v) { return {1.0, v, std::conj(v), 1.0}; }

// Group element taking a disk point into the closed octagon, with the number of pairings used.
inline std::pair<MoebiusMap, int> reduce(cplx w) {
  MoebiusMap gamma;
  for (int it = 0; it < 1000; ++it) {
    const cplx z = gamma(w);
    const double d0 = distance(z, 0.0);
    int best = -1;
    double best_d = d0 - 1e-13;
    for (int k = 0; k < 8; ++k) {
      const double dk = distance(z, neighbour_centre(k));
      if (dk < best_d) {
        best_d = dk;
        best = k;
      }
    }
    if (best < 0) return {gamma, it};
    gamma = pairing(partner(best), best).inverse() * gamma;
  }
  throw Error(ErrorKind::non_convergence, "fixtures", "octagon reduction did not terminate");
}

inline MoebiusMap reduction(cplx w) { return reduce(w).first; }

// sigma[k] takes vertex k to vertex 0, found by walking the vertex cycle.
inline std::array<MoebiusMap, 8> vertex_maps() {
  std::array<std::optional<MoebiusMap>, 8> found;
  found[0] = MoebiusMap::identity();
  std::deque<int> queue{0};
  while (!queue.empty()) {
    const int k = queue.front();
    queue.pop_front();
    // Sides k-1 and k end at vertex k.
    for (int side : {(k + 7) % 8, k}) {
      const MoebiusMap g = pairing(side, partner(side));
      const cplx image = g(vertex(k));
      for (int l = 0; l < 8; ++l) {
        if (found[l] || std::abs(image - vertex(l)) > 1e-9) continue;
        found[l] = *found[k] * g.inverse();
        queue.push_back(l);
      }
    }
  }
  std::array<MoebiusMap, 8> out;
  for (int k = 0; k < 8; ++k) {
    if (!found[k]) throw Error(ErrorKind::invariant_violation, "fixtures", "vertex cycle is incomplete");
    out[k] = *found[k];
  }
  return out;
}

// Distance to the cone point from a point of the octagon, with the nearest vertex.
inline std::pair<double, int> cone_distance(cplx p) {
  std::pair<double, int> best{std::numeric_limits<double>::infinity(), 0};
  for (int k = 0; k < 8; ++k) best = std::min(best, {distance(p, vertex(k)), k});
  return best;
}

inline bool in_octagon(cplx p) {
  const double d0 = distance(p, 0.0);
  for (int k = 0; k < 8; ++k) {
    if (distance(p, neighbour_centre(k)) < d0) return false;
  }
  return true;
}

}  // namespace octagon

struct Genus2Options {
  double h_centre = 0.015;  // spacing of the chart centred at the octagon centre
  double h_vertex = 0.015;  // spacing of the chart centred at the cone point
  double cone_radius = 2.0;
  // Width of the region owned by both charts, so that donor stencils never reach fringe samples.
  double overlap = 0.35;
  int band = 5;
  int supersample = 8;
};

// Chart 0 covers the octagon away from the cone point, chart 1 is a disk
// around vertex 0 of which one quarter is owned; the rest are fringe copies.
// Owned regions overlap by `overlap`; quadrature weights follow the exact
// partition at `cone_radius`.
class Genus2Surface {
 public:
  explicit Genus2Surface(const Genus2Options& opt = {}) : opt_(opt), sigma_(octagon::vertex_maps()) {
    frame_ = octagon::centre_at(octagon::vertex(0));
    build();
  }

  const AtlasPtr& atlas() const noexcept { return atlas_; }
  const Genus2Options& options() const noexcept { return opt_; }
  static fields::ConeSignature signature() { return {2, {octagon::cone_angle}}; }

  // Disk point of sample g in the octagon's universal cover.
  cplx disk_point(std::size_t g) const {
    const cplx x = chart_point(*atlas_, g);
    return atlas_->locate(g).chart == 0 ? x : frame_(x);
  }

  // The same point reduced into the octagon.
  cplx reduced_point(std::size_t g) const {
    const cplx w = disk_point(g);
    return octagon::reduction(w)(w);
  }

  // Fuchsian datum: Poincare metric at infinity, q = 0.
  infinity::InfinityData fuchsian() const {
    const MetricField I = poincare_field(atlas_);
    return infinity::assemble(I, MetricField::generate(atlas_, "II*", [&](std::size_t g) { return Mat2(0.5 * I[g]); }),
                              fields::ScalarField(atlas_, "K_I*", -1.0));
  }

  // Smooth conformal factor with one bump at the octagon centre and one radial bump at the cone point.
  fields::ScalarField bump_factor(double centre_amp = 0.04, double cone_amp = 0.03) const {
    // C^5 profile, gentle enough to be resolved by the grid.
    auto bump = [](double s) { return s < 1.0 ? std::pow(1.0 - s * s, 6) : 0.0; };
    return fields::ScalarField::generate(atlas_, "u", [&](std::size_t g) {
      if (!atlas_->active(g)) return 0.0;
      const cplx p = reduced_point(g);
      const double u0 = centre_amp * bump(octagon::distance(p, 0.0) / 1.4) * (1.0 + std::real(p * p));
      const double u1 = cone_amp * bump(octagon::cone_distance(p).first / 1.2);
      return u0 + u1;
    });
  }

  infinity::InfinityData perturbed(double centre_amp = 0.04, double cone_amp = 0.03) const {
    return infinity::gauge_transform(fuchsian(), bump_factor(centre_amp, cone_amp));
  }

 private:
  struct Donor {
    int chart;
    cplx at;
    MoebiusMap map;  // sample coordinate -> donor coordinate
  };

  double cone_euclid() const { return std::tanh(0.5 * opt_.cone_radius); }

  bool owned_by_centre(cplx p) const {
    return std::norm(p) < 1.0 && octagon::in_octagon(p) && octagon::cone_distance(p).first >= opt_.cone_radius;
  }
  // `slack` keeps round-off on the quarter's edges from selecting the wrong copy.
  bool owned_by_vertex(cplx x, double slack = 0.0) const {
    if (std::abs(x) >= cone_euclid()) return false;
    const double a = std::arg(x);
    return x == 0.0 || (a >= -slack && a < 0.5 * octagon::pi - slack);
  }

  // Unknowns of chart 0: a neighbourhood of the octagon outside the shrunken cone disk.
  bool solved_by_centre(cplx x) const {
    if (std::norm(x) >= 1.0) return false;
    const double d0 = octagon::distance(x, 0.0);
    if (d0 > octagon::circumradius()) return false;
    for (int k = 0; k < 8; ++k) {
      if (d0 - octagon::distance(x, octagon::neighbour_centre(k)) >= 2.0 * opt_.overlap) return false;
    }
    // Only the octagon and its edge neighbours, not the polygons beyond a vertex.
    const auto [gamma, steps] = octagon::reduce(x);
    return steps <= 1 && octagon::cone_distance(gamma(x)).first >= opt_.cone_radius - opt_.overlap;
  }
  double solved_euclid() const { return std::tanh(0.5 * (opt_.cone_radius + opt_.overlap)); }

  // Donor of a disk point w given by `to_disk` from the sample coordinate.
  Donor donor_for(const MoebiusMap& to_disk, cplx x) const {
    const cplx w = to_disk(x);
    const MoebiusMap gamma = octagon::reduction(w);
    const cplx p = gamma(w);
    const auto [dv, k] = octagon::cone_distance(p);
    if (dv >= opt_.cone_radius) return {0, p, gamma * to_disk};
    MoebiusMap m = frame_.inverse() * sigma_[k] * gamma * to_disk;
    // Rotate into the owned quarter by powers of the order-4 stabilizer.
    for (int r = 0; r < 4; ++r) {
      const cplx y = m(x);
      if (owned_by_vertex(y, 1e-9)) break;
      m = octagon::rotation(-0.5 * octagon::pi) * m;
    }
    return {1, m(x), m};
  }

  void build() {
    const double hA = opt_.h_centre, hB = opt_.h_vertex;
    const int band = opt_.band;

    // Chart 1: symmetric grid around the cone point.
    const int halfB = static_cast<int>(std::ceil(solved_euclid() / hB)) + band + 1;
    const int nB = 2 * halfB + 1;
    // Chart 0: square around the octagon minus the cone disk.
    const double reach = std::min(1.0, std::tanh(0.5 * (octagon::circumradius() - opt_.cone_radius + opt_.overlap)) + 0.1);
    const int halfA = static_cast<int>(std::ceil(reach / hA)) + band + 1;
    const int nA = 2 * halfA + 1;

    std::vector<fields::Chart> charts{fields::Chart::rect(0, {-halfA * hA, -halfA * hA}, {hA, hA}, {nA, nA}),
                                      fields::Chart::rect(1, {-halfB * hB, -halfB * hB}, {hB, hB}, {nB, nB})};
    const std::array<int, 2> n{nA, nB};
    const std::array<int, 2> half{halfA, halfB};
    const std::array<double, 2> h{hA, hB};

    std::array<std::vector<char>, 2> own, core;
    for (int c = 0; c < 2; ++c) {
      own[c].assign(static_cast<std::size_t>(n[c]) * n[c], 0);
      core[c].assign(own[c].size(), 0);
      for (int i = 0; i < n[c]; ++i) {
        for (int j = 0; j < n[c]; ++j) {
          const cplx x((i - half[c]) * h[c], (j - half[c]) * h[c]);
          const std::size_t l = static_cast<std::size_t>(i) * n[c] + j;
          if (c == 0) {
            own[c][l] = solved_by_centre(x);
            core[c][l] = own[c][l];
          } else {
            const int a = i - half[c], b = j - half[c];
            const bool inside = std::abs(x) < solved_euclid();
            own[c][l] = inside && ((a > 0 && b >= 0) || (a == 0 && b == 0));
            core[c][l] = inside;
          }
        }
      }
    }

    std::vector<fields::SampleRole> roles;
    std::vector<fields::Overlap> overlaps;
    std::vector<double> weights;
    const MoebiusMap ident;
    for (int c = 0; c < 2; ++c) {
      const MoebiusMap to_disk = c == 0 ? ident : frame_;
      for (int i = 0; i < n[c]; ++i) {
        for (int j = 0; j < n[c]; ++j) {
          const std::size_t l = static_cast<std::size_t>(i) * n[c] + j;
          const cplx x((i - half[c]) * h[c], (j - half[c]) * h[c]);
          bool near = false;
          for (int a = std::max(0, i - band); a <= std::min(n[c] - 1, i + band) && !near; ++a) {
            for (int b = std::max(0, j - band); b <= std::min(n[c] - 1, j + band) && !near; ++b) {
              near = core[c][static_cast<std::size_t>(a) * n[c] + b];
            }
          }
          if (own[c][l]) {
            roles.push_back(fields::SampleRole::owned);
          } else if (near && std::abs(x) < 0.995) {
            roles.push_back(fields::SampleRole::fringe);
            const Donor d = donor_for(to_disk, x);
            const cplx dz = d.map.derivative(x);
            overlaps.push_back({c, i, j, d.chart, snap(charts[d.chart], d.at), mat2(dz.real(), -dz.imag(), dz.imag(), dz.real())});
          } else {
            roles.push_back(fields::SampleRole::inactive);
          }
          weights.push_back(roles.back() == fields::SampleRole::inactive ? 0.0 : cell_weight(c, x, h[c]));
        }
      }
    }
    atlas_ = std::make_shared<const ChartAtlas>(std::move(charts), std::move(overlaps), std::move(roles), std::move(weights));
  }

  // Donors landing on a grid node (copies under the cone rotation) use the node exactly.
  static std::array<double, 2> snap(const fields::Chart& c, cplx at) {
    std::array<double, 2> out{at.real(), at.imag()};
    std::array<int, 2> idx{};
    for (int k = 0; k < 2; ++k) {
      const double u = (out[k] - c.origin[k]) / c.spacing[k];
      idx[k] = static_cast<int>(std::lround(u));
      if (std::abs(u - idx[k]) > 1e-7) return out;
    }
    return c.coord(idx[0], idx[1]);
  }

  // Cell area times the supersampled fraction inside the chart's ownership region.
  double cell_weight(int chart, cplx x, double h) const {
    const int s = opt_.supersample;
    // Cheap rejection for cells far from the region.
    if (chart == 0) {
      if (octagon::distance(x, 0.0) > octagon::circumradius() + 0.5) return 0.0;
    } else if (std::abs(x) > cone_euclid() + 2.0 * h) {
      return 0.0;
    }
    int hits = 0;
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < s; ++b) {
        const cplx y = x + cplx((a + 0.5) / s - 0.5, (b + 0.5) / s - 0.5) * h;
        if (std::norm(y) >= 1.0) continue;
        hits += chart == 0 ? owned_by_centre(y) : owned_by_vertex(y);
      }
    }
    return h * h * hits / (s * s);
  }

  Genus2Options opt_;
  std::array<MoebiusMap, 8> sigma_;
  MoebiusMap frame_;
  AtlasPtr atlas_;
};

// Fuchsian holonomy of the orbifold: side pairings as SU(1,1) maps with
// c = ([a1,b1][a2,b2])^-1 elliptic of angle pi/2.
struct Genus2Holonomy {
  MoebiusMap a1, b1, a2, b2, c;
};

inline Genus2Holonomy genus2_holonomy() {
  using octagon::pairing;
  Genus2Holonomy h;
  h.a1 = pairing(2, 0);
  h.b1 = pairing(1, 3);
  h.a2 = pairing(6, 4);
  h.b2 = pairing(5, 7);
  auto comm = [](const MoebiusMap& a, const MoebiusMap& b) { return a * b * a.inverse() * b.inverse(); };
  h.c = (comm(h.a1, h.b1) * comm(h.a2, h.b2)).inverse();
  return h;
}

}  // namespace hyperend::fixtures
