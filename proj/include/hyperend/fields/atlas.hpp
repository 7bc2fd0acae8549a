#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "hyperend/core/error.hpp"
#include "hyperend/core/linalg.hpp"

namespace hyperend::fields {

enum class ChartKind { rect, polar };

// owned samples carry equations, fringe samples are interpolated from a donor.
enum class SampleRole : std::uint8_t { owned = 0, fringe = 1, inactive = 2 };

struct Chart {
  int id = 0;
  ChartKind kind = ChartKind::rect;
  std::array<double, 2> origin{0.0, 0.0};
  std::array<double, 2> spacing{1.0, 1.0};
  std::array<int, 2> dims{0, 0};
  double period = 0.0;

  static Chart rect(int id, std::array<double, 2> origin, std::array<double, 2> spacing,
                    std::array<int, 2> dims) {
    Chart c;
    c.id = id;
    c.kind = ChartKind::rect;
    c.origin = origin;
    c.spacing = spacing;
    c.dims = dims;
    return c;
  }

  // Geodesic polar annulus r in [r_min, r_max], alpha periodic with the cone angle.
  static Chart polar(int id, double r_min, double r_max, int n_r, int n_alpha, double period) {
    Chart c;
    c.id = id;
    c.kind = ChartKind::polar;
    c.origin = {r_min, 0.0};
    c.spacing = {(r_max - r_min) / (n_r - 1), period / n_alpha};
    c.dims = {n_r, n_alpha};
    c.period = period;
    return c;
  }

  double r_min() const { return origin[0]; }
  double r_max() const { return origin[0] + spacing[0] * (dims[0] - 1); }
  bool periodic(int axis) const { return kind == ChartKind::polar && axis == 1; }
  std::size_t size() const { return static_cast<std::size_t>(dims[0]) * dims[1]; }
  std::size_t local(int i, int j) const { return static_cast<std::size_t>(i) * dims[1] + j; }
  std::array<double, 2> coord(int i, int j) const {
    return {origin[0] + i * spacing[0], origin[1] + j * spacing[1]};
  }

  void validate() const {
    if (dims[0] < 8 || dims[1] < 8) {
      throw Error(ErrorKind::out_of_domain, "surface_fields",
                  "chart " + std::to_string(id) + " needs at least 8 samples per direction");
    }
    if (!(spacing[0] > 0.0) || !(spacing[1] > 0.0)) {
      throw Error(ErrorKind::out_of_domain, "surface_fields", "chart spacing must be positive");
    }
    if (kind == ChartKind::polar && (!(origin[0] > 0.0) || !(period > 0.0))) {
      throw Error(ErrorKind::out_of_domain, "surface_fields", "polar chart needs r_min > 0 and period > 0");
    }
  }
};

// Declares that sample (i, j) of `chart` is the point `at` of chart `donor`.
// `jacobian` is d(donor coordinates)/d(chart coordinates) at that point.
struct Overlap {
  int chart = 0;
  int i = 0;
  int j = 0;
  int donor = 0;
  std::array<double, 2> at{0.0, 0.0};
  Mat2 jacobian = Mat2::Identity();
};

using WeightList = std::vector<std::pair<std::size_t, double>>;

struct SampleRef {
  int chart;  // position in the chart list
  int i;
  int j;
};

inline std::array<double, 4> lagrange4(double t) {
  // Nodes at 0, 1, 2, 3.
  return {-(t - 1) * (t - 2) * (t - 3) / 6.0, t * (t - 2) * (t - 3) / 2.0,
          -t * (t - 1) * (t - 3) / 2.0, t * (t - 1) * (t - 2) / 6.0};
}

class ChartAtlas {
 public:
  ChartAtlas(std::vector<Chart> charts, std::vector<Overlap> overlaps = {},
             std::vector<SampleRole> roles = {}, std::vector<double> weights = {})
      : charts_(std::move(charts)), overlaps_(std::move(overlaps)) {
    if (charts_.empty()) throw Error(ErrorKind::atlas_mismatch, "surface_fields", "atlas has no charts");
    offsets_.resize(charts_.size() + 1, 0);
    for (std::size_t c = 0; c < charts_.size(); ++c) {
      charts_[c].validate();
      for (std::size_t d = 0; d < c; ++d) {
        if (charts_[d].id == charts_[c].id) {
          throw Error(ErrorKind::atlas_mismatch, "surface_fields", "duplicate chart id");
        }
      }
      offsets_[c + 1] = offsets_[c] + charts_[c].size();
    }
    const std::size_t n = offsets_.back();
    roles_ = roles.empty() ? std::vector<SampleRole>(n, SampleRole::owned) : std::move(roles);
    if (roles_.size() != n) throw Error(ErrorKind::atlas_mismatch, "surface_fields", "role count mismatch");

    donor_of_.assign(n, -1);
    for (std::size_t k = 0; k < overlaps_.size(); ++k) {
      const Overlap& o = overlaps_[k];
      const std::size_t g = global(position(o.chart), o.i, o.j);
      if (donor_of_[g] >= 0) {
        throw Error(ErrorKind::atlas_mismatch, "surface_fields", "sample has two overlap records");
      }
      donor_of_[g] = static_cast<long>(k);
      roles_[g] = SampleRole::fringe;
    }
    for (std::size_t g = 0; g < n; ++g) {
      if (roles_[g] == SampleRole::fringe && donor_of_[g] < 0) {
        throw Error(ErrorKind::atlas_mismatch, "surface_fields", "fringe sample without donor");
      }
    }
    donor_weights_.resize(overlaps_.size());
    for (std::size_t k = 0; k < overlaps_.size(); ++k) {
      donor_weights_[k] = interpolation_weights(overlaps_[k].donor, overlaps_[k].at);
    }

    if (weights.empty()) {
      weights_ = default_weights();
    } else {
      if (weights.size() != n) throw Error(ErrorKind::atlas_mismatch, "surface_fields", "weight count mismatch");
      weights_ = std::move(weights);
    }
  }

  const std::vector<Chart>& charts() const noexcept { return charts_; }
  const std::vector<Overlap>& overlaps() const noexcept { return overlaps_; }
  const std::vector<SampleRole>& roles() const noexcept { return roles_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return offsets_.back(); }
  std::size_t offset(int chart_pos) const { return offsets_[chart_pos]; }

  int position(int chart_id) const {
    for (std::size_t c = 0; c < charts_.size(); ++c) {
      if (charts_[c].id == chart_id) return static_cast<int>(c);
    }
    throw Error(ErrorKind::atlas_mismatch, "surface_fields", "unknown chart id " + std::to_string(chart_id));
  }

  std::size_t global(int chart_pos, int i, int j) const {
    const Chart& c = charts_[chart_pos];
    if (i < 0 || i >= c.dims[0] || j < 0 || j >= c.dims[1]) {
      throw Error(ErrorKind::atlas_mismatch, "surface_fields", "sample index out of range");
    }
    return offsets_[chart_pos] + c.local(i, j);
  }

  SampleRef locate(std::size_t g) const {
    std::size_t c = 0;
    while (offsets_[c + 1] <= g) ++c;
    const std::size_t local = g - offsets_[c];
    const int n1 = charts_[c].dims[1];
    return {static_cast<int>(c), static_cast<int>(local / n1), static_cast<int>(local % n1)};
  }

  std::array<double, 2> coord(std::size_t g) const {
    const SampleRef s = locate(g);
    return charts_[s.chart].coord(s.i, s.j);
  }

  SampleRole role(std::size_t g) const { return roles_[g]; }
  bool active(std::size_t g) const { return roles_[g] != SampleRole::inactive; }

  // Donor interpolation of a fringe sample, or nullptr.
  const WeightList* donor_weights(std::size_t g) const {
    return donor_of_[g] < 0 ? nullptr : &donor_weights_[donor_of_[g]];
  }
  const Overlap* overlap_of(std::size_t g) const {
    return donor_of_[g] < 0 ? nullptr : &overlaps_[donor_of_[g]];
  }

  // Bicubic Lagrange weights at point `at` of chart `chart_id`.
  WeightList interpolation_weights(int chart_id, std::array<double, 2> at) const {
    const int pos = position(chart_id);
    const Chart& c = charts_[pos];
    std::array<int, 2> base{};
    std::array<std::array<double, 4>, 2> w{};
    for (int axis = 0; axis < 2; ++axis) {
      const double u = (at[axis] - c.origin[axis]) / c.spacing[axis];
      int b = static_cast<int>(std::floor(u)) - 1;
      if (!c.periodic(axis)) {
        if (u < -1e-9 || u > c.dims[axis] - 1 + 1e-9) {
          throw Error(ErrorKind::atlas_mismatch, "surface_fields",
                      "donor point outside chart " + std::to_string(chart_id));
        }
        b = std::clamp(b, 0, c.dims[axis] - 4);
      }
      base[axis] = b;
      w[axis] = lagrange4(u - b);
    }
    WeightList out;
    out.reserve(16);
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        const double wt = w[0][a] * w[1][b];
        int i = base[0] + a;
        int j = base[1] + b;
        if (c.periodic(1)) j = ((j % c.dims[1]) + c.dims[1]) % c.dims[1];
        const std::size_t g = offsets_[pos] + c.local(i, j);
        if (!active(g)) {
          throw Error(ErrorKind::atlas_mismatch, "surface_fields",
                      "donor stencil touches an inactive sample of chart " + std::to_string(chart_id));
        }
        if (wt != 0.0) out.emplace_back(g, wt);
      }
    }
    return out;
  }

  // Trapezoid weights over owned samples.
  std::vector<double> default_weights() const {
    std::vector<double> w(size(), 0.0);
    for (std::size_t c = 0; c < charts_.size(); ++c) {
      const Chart& ch = charts_[c];
      for (int i = 0; i < ch.dims[0]; ++i) {
        for (int j = 0; j < ch.dims[1]; ++j) {
          double wi = ch.spacing[0];
          double wj = ch.spacing[1];
          if (i == 0 || i == ch.dims[0] - 1) wi *= 0.5;
          if (!ch.periodic(1) && (j == 0 || j == ch.dims[1] - 1)) wj *= 0.5;
          const std::size_t g = offsets_[c] + ch.local(i, j);
          w[g] = roles_[g] == SampleRole::owned ? wi * wj : 0.0;
        }
      }
    }
    return w;
  }

 private:
  std::vector<Chart> charts_;
  std::vector<Overlap> overlaps_;
  std::vector<SampleRole> roles_;
  std::vector<double> weights_;
  std::vector<std::size_t> offsets_;
  std::vector<long> donor_of_;
  std::vector<WeightList> donor_weights_;
};

}  // namespace hyperend::fields
