#pragma once

#include <algorithm>
#include <array>
#include <vector>

#include "hyperend/core/error.hpp"
#include "hyperend/fields/atlas.hpp"
#include "hyperend/fields/field.hpp"

namespace hyperend::fields {

// Finite-difference weights for derivatives of order 0..m_max at x0 on arbitrary
// nodes (Fornberg's recursion).  Result[k][m] is the weight of node k.
inline std::vector<std::array<double, 3>> fornberg_weights(double x0, const std::vector<double>& x,
                                                           int m_max = 2) {
  const int n = static_cast<int>(x.size());
  std::vector<std::array<double, 3>> c(n, {0.0, 0.0, 0.0});
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m_max);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  return c;
}

struct SampleStencils {
  bool valid = false;
  bool centered = false;
  std::array<WeightList, 2> d1;  // d/dx0, d/dx1
  std::array<WeightList, 3> d2;  // d2/dx0dx0, d2/dx0dx1, d2/dx1dx1
};

template <class V>
V apply_weights(const WeightList& w, const std::vector<V>& values) {
  V acc = values[w.front().first] * 0.0;
  for (const auto& [g, wt] : w) acc += wt * values[g];
  return acc;
}

// Per-sample derivative stencils with neighbour step `step` and accuracy `order`
// (2 or 4).  Centered where the neighbours are active, one-sided otherwise.
class Differentiator {
 public:
  Differentiator(AtlasPtr atlas, int step = 1, int order = 2)
      : atlas_(std::move(atlas)), step_(step), order_(order) {
    if (order_ != 2 && order_ != 4) {
      throw Error(ErrorKind::out_of_domain, "surface_fields", "stencil order must be 2 or 4");
    }
    build();
  }

  const AtlasPtr& atlas() const noexcept { return atlas_; }
  int step() const noexcept { return step_; }
  const SampleStencils& at(std::size_t g) const { return stencils_[g]; }
  bool valid(std::size_t g) const { return stencils_[g].valid; }
  bool centered(std::size_t g) const { return stencils_[g].centered; }

  template <class V>
  V d1(const std::vector<V>& v, std::size_t g, int axis) const {
    return apply_weights(stencils_[g].d1[axis], v);
  }
  // (a, b) in {0,1}^2, symmetric.
  template <class V>
  V d2(const std::vector<V>& v, std::size_t g, int a, int b) const {
    return apply_weights(stencils_[g].d2[a + b], v);
  }

 private:
  struct Line {
    bool ok = false;
    bool centered = false;
    WeightList w1;
    WeightList w2;
  };

  bool usable(const Chart& c, int pos, int i, int j) const {
    if (i < 0 || i >= c.dims[0]) return false;
    if (c.periodic(1)) j = ((j % c.dims[1]) + c.dims[1]) % c.dims[1];
    if (j < 0 || j >= c.dims[1]) return false;
    return atlas_->active(atlas_->offset(pos) + c.local(i, j));
  }

  std::size_t index(const Chart& c, int pos, int i, int j) const {
    if (c.periodic(1)) j = ((j % c.dims[1]) + c.dims[1]) % c.dims[1];
    return atlas_->offset(pos) + c.local(i, j);
  }

  // Weights for derivative order m along one axis from a window of offsets.
  bool window(const Chart& c, int pos, int i, int j, int axis, int lo, int n, int m,
              WeightList& out) const {
    std::vector<double> x;
    std::vector<std::size_t> idx;
    for (int k = lo; k < lo + n; ++k) {
      const int ii = axis == 0 ? i + k * step_ : i;
      const int jj = axis == 1 ? j + k * step_ : j;
      if (!usable(c, pos, ii, jj)) return false;
      x.push_back(k * step_ * c.spacing[axis]);
      idx.push_back(index(c, pos, ii, jj));
    }
    const auto w = fornberg_weights(0.0, x, m);
    out.clear();
    for (int k = 0; k < n; ++k) {
      if (w[k][m] != 0.0) out.emplace_back(idx[k], w[k][m]);
    }
    return true;
  }

  bool one_sided(const Chart& c, int pos, int i, int j, int axis, int m, WeightList& out) const {
    const int n = order_ + m;
    // Windows ordered by distance from the centered position.
    std::vector<int> starts;
    for (int lo = -(n - 1); lo <= 0; ++lo) starts.push_back(lo);
    std::stable_sort(starts.begin(), starts.end(), [n](int a, int b) {
      return std::abs(2 * a + n - 1) < std::abs(2 * b + n - 1);
    });
    for (int lo : starts) {
      if (window(c, pos, i, j, axis, lo, n, m, out)) return true;
    }
    return false;
  }

  Line line(const Chart& c, int pos, int i, int j, int axis) const {
    Line l;
    const int half = order_ / 2;
    if (window(c, pos, i, j, axis, -half, order_ + 1, 1, l.w1) &&
        window(c, pos, i, j, axis, -half, order_ + 1, 2, l.w2)) {
      l.ok = l.centered = true;
      return l;
    }
    l.ok = one_sided(c, pos, i, j, axis, 1, l.w1) && one_sided(c, pos, i, j, axis, 2, l.w2);
    return l;
  }

  static WeightList merge(WeightList w) {
    std::sort(w.begin(), w.end());
    WeightList out;
    for (const auto& [g, wt] : w) {
      if (!out.empty() && out.back().first == g) {
        out.back().second += wt;
      } else {
        out.emplace_back(g, wt);
      }
    }
    return out;
  }

  void build() {
    const std::size_t n = atlas_->size();
    std::vector<std::array<Line, 2>> lines(n);
    for (std::size_t g = 0; g < n; ++g) {
      if (!atlas_->active(g)) continue;
      const SampleRef s = atlas_->locate(g);
      const Chart& c = atlas_->charts()[s.chart];
      for (int axis = 0; axis < 2; ++axis) lines[g][axis] = line(c, s.chart, s.i, s.j, axis);
    }
    stencils_.assign(n, {});
    for (std::size_t g = 0; g < n; ++g) {
      if (!atlas_->active(g) || !lines[g][0].ok || !lines[g][1].ok) continue;
      SampleStencils& st = stencils_[g];
      st.d1 = {lines[g][0].w1, lines[g][1].w1};
      st.d2[0] = lines[g][0].w2;
      st.d2[2] = lines[g][1].w2;
      bool ok = true;
      bool centered = lines[g][0].centered && lines[g][1].centered;
      WeightList mixed;
      for (const auto& [a, wa] : lines[g][0].w1) {
        if (!lines[a][1].ok) {
          ok = false;
          break;
        }
        centered = centered && lines[a][1].centered;
        for (const auto& [b, wb] : lines[a][1].w1) mixed.emplace_back(b, wa * wb);
      }
      if (!ok) continue;
      st.d2[1] = merge(std::move(mixed));
      st.valid = true;
      st.centered = centered;
    }
  }

  AtlasPtr atlas_;
  int step_;
  int order_;
  std::vector<SampleStencils> stencils_;
};

}  // namespace hyperend::fields
