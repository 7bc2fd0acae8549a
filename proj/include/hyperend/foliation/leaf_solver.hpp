#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "hyperend/core/error.hpp"
#include "hyperend/core/format.hpp"
#include "hyperend/core/report.hpp"
#include "hyperend/end/end_family.hpp"
#include "hyperend/fields/curvature.hpp"
#include "hyperend/fields/signature.hpp"
#include "hyperend/foliation/embedding.hpp"

namespace hyperend::foliation {

using end::EndFamily;

// Datum jet at one sample: I*, II*, III* and their coordinate derivatives.
struct SampleJet {
  Mat2 I, II, III;
  std::array<Mat2, 2> dI, dII, dIII;
};

template <class T>
using M2 = Eigen::Matrix<T, 2, 2>;

template <class T>
struct GraphGeometry {
  M2<T> I;
  M2<T> II;
  T K;
};

// Induced metric, second fundamental form and curvature of the graph {p = f(x)}
// in eps dp^2 + h(p), h = 1/2 (e^{2p} I* + 2 eps II* + e^{-2p} III*).
template <class T>
GraphGeometry<T> graph_geometry(const SampleJet& s, double eps, T f, T f1, T f2, T f11, T f12, T f22) {
  using std::exp;
  using std::sqrt;
  const T e2 = exp(T(2.0) * f), em2 = exp(T(-2.0) * f);
  const M2<T> I = s.I.cast<T>(), II = s.II.cast<T>(), III = s.III.cast<T>();
  const M2<T> h = T(0.5) * (e2 * I + T(2.0 * eps) * II + em2 * III);
  const M2<T> hp = e2 * I - em2 * III;
  std::array<M2<T>, 2> dh;
  for (int k = 0; k < 2; ++k) {
    dh[k] = T(0.5) * (e2 * s.dI[k].cast<T>() + T(2.0 * eps) * s.dII[k].cast<T>() + em2 * s.dIII[k].cast<T>());
  }
  const M2<T> hi = h.inverse();
  const T df[2] = {f1, f2};
  M2<T> hess;
  hess << f11, f12, f12, f22;

  M2<T> H = -hess + T(0.5 * eps) * hp;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int m = 0; m < 2; ++m) {
        T gamma = T(0.0);
        for (int l = 0; l < 2; ++l) gamma += hi(m, l) * T(0.5) * (dh[i](j, l) + dh[j](i, l) - dh[l](i, j));
        H(i, j) += gamma * df[m];
      }
    }
  }
  const M2<T> S = T(0.5) * hi * hp;
  T Hr[2];
  for (int i = 0; i < 2; ++i) Hr[i] = S(0, i) * df[0] + S(1, i) * df[1];
  M2<T> Tm;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) Tm(i, j) = H(i, j) + df[j] * Hr[i] + df[i] * Hr[j];
  }
  T q = T(0.0);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) q += hi(i, j) * df[i] * df[j];
  }
  const T W = sqrt(T(1.0) + T(eps) * q);
  GraphGeometry<T> out;
  out.II = (T(eps) / W) * Tm;
  out.I = h;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) out.I(i, j) += T(eps) * df[i] * df[j];
  }
  out.K = T(eps) * (out.II.determinant() / out.I.determinant() - T(1.0));
  return out;
}

struct LeafOptions {
  double tol = 1e-8;
  int max_iter = 50;
  int order = 2;                        // stencil order for the graph
  std::optional<double> initial_shift;  // added to the constant initial guess
};

struct FoliationLeaf {
  double K = 0.0;
  Side side = Side::hyperbolic;
  ScalarField graph;
  MetricField I;
  OperatorField B;
  MetricField III;
  double residual = 0.0;
  int iterations = 0;
  bool closed_form = false;
  std::vector<double> history;
};

// Range of curvatures a leaf can take: (sup_x K_{I_{p0}}(x), 0) with p0 the
// positivity root of the leaf eigenvalues (not clamped at 0).
struct AttainableRange {
  double root = 0.0;
  double low = 0.0;
  double high = 0.0;
};

inline AttainableRange attainable_range(const EndFamily& f) {
  const auto& atlas = *f.atlas();
  double sup = 0.0;
  for (std::size_t g = 0; g < atlas.size(); ++g) {
    if (atlas.role(g) != fields::SampleRole::owned) continue;
    const auto [l, m] = ordered_eigenvalues(f.datum().Bstar[g]);
    sup = std::max(sup, f.side() == Side::hyperbolic ? l : std::max(std::abs(l), std::abs(m)));
  }
  if (!(sup > 0.0)) throw Error(ErrorKind::rejected_datum, "foliation", "B* has no positive eigenvalue");
  AttainableRange r;
  r.root = 0.5 * std::log(sup);
  r.low = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < atlas.size(); ++g) {
    if (atlas.role(g) != fields::SampleRole::owned) continue;
    const double k = f.curvature(g, r.root);
    if (std::isfinite(k) && f.flow(g, r.root).determinant() > 1e-12) r.low = std::max(r.low, k);
  }
  if (f.side() == Side::hyperbolic) r.low = std::max(r.low, -1.0);
  r.high = 0.0;
  return r;
}

namespace detail {

// Value of every active sample as a combination of owned samples.
class Expansion {
 public:
  explicit Expansion(const ChartAtlas& atlas) : index_(atlas.size(), -1), rows_(atlas.size()) {
    int n = 0;
    for (std::size_t g = 0; g < atlas.size(); ++g) {
      if (atlas.role(g) == fields::SampleRole::owned) {
        index_[g] = n++;
        rows_[g] = {{index_[g], 1.0}};
      }
    }
    owned_ = n;
    std::vector<char> state(atlas.size(), 0);
    for (std::size_t g = 0; g < atlas.size(); ++g) {
      if (atlas.role(g) == fields::SampleRole::fringe) resolve(atlas, g, state);
    }
  }

  int owned() const noexcept { return owned_; }
  int index(std::size_t g) const { return index_[g]; }
  const std::vector<std::pair<int, double>>& row(std::size_t g) const { return rows_[g]; }

 private:
  // Depth-first substitution of donor rows; donor chains must end at owned samples.
  const std::vector<std::pair<int, double>>& resolve(const ChartAtlas& atlas, std::size_t g, std::vector<char>& state) {
    if (atlas.role(g) != fields::SampleRole::fringe || state[g] == 2) return rows_[g];
    if (state[g] == 1) {
      throw Error(ErrorKind::atlas_mismatch, "foliation", "cyclic donor chain at " + fields::sample_name(atlas, g));
    }
    state[g] = 1;
    std::map<int, double> acc;
    for (const auto& [d, w] : *atlas.donor_weights(g)) {
      // Round-off weights of donors sitting on grid points are dropped.
      if (std::abs(w) <= 1e-12) continue;
      for (const auto& [k, v] : resolve(atlas, d, state)) acc[k] += w * v;
    }
    rows_[g].clear();
    for (const auto& [k, v] : acc) {
      if (std::abs(v) > 1e-15) rows_[g].emplace_back(k, v);
    }
    state[g] = 2;
    return rows_[g];
  }

  std::vector<int> index_;
  std::vector<std::vector<std::pair<int, double>>> rows_;
  int owned_ = 0;
};

// sum w_b (v_b - v_g) and the matching coefficient list.
inline double apply_diff(const fields::WeightList& w, const std::vector<double>& v, std::size_t g) {
  double acc = 0.0;
  for (const auto& [b, wt] : w) acc += wt * (v[b] - v[g]);
  return acc;
}

}  // namespace detail

// Discrete curvature operator of graphs over one end family.
class GraphOperator {
 public:
  GraphOperator(const EndFamily& family, int order)
      : family_(family), atlas_(family.atlas()), d_(atlas_, 1, order), jets_(atlas_->size()) {
    const fields::Differentiator d4(atlas_, 1, 4);
    const auto& datum = family.datum();
    std::vector<Mat2> III(atlas_->size(), Mat2::Zero());
    for (std::size_t g = 0; g < atlas_->size(); ++g) {
      if (atlas_->active(g)) III[g] = datum.IIIstar(g);
    }
    for (std::size_t g = 0; g < atlas_->size(); ++g) {
      if (atlas_->role(g) != fields::SampleRole::owned) continue;
      if (!d_.valid(g) || !d4.valid(g)) {
        throw Error(ErrorKind::atlas_mismatch, "foliation", "no stencil at " + fields::sample_name(*atlas_, g));
      }
      SampleJet& s = jets_[g];
      s.I = datum.Istar[g];
      s.II = datum.IIstar[g];
      s.III = III[g];
      for (int k = 0; k < 2; ++k) {
        s.dI[k] = d4.d1(datum.Istar.values(), g, k);
        s.dII[k] = d4.d1(datum.IIstar.values(), g, k);
        s.dIII[k] = d4.d1(III, g, k);
      }
    }
  }

  const AtlasPtr& atlas() const { return atlas_; }
  double eps() const { return family_.sign(); }

  std::array<double, 6> inputs(const std::vector<double>& f, std::size_t g) const {
    const auto& st = d_.at(g);
    return {f[g],
            detail::apply_diff(st.d1[0], f, g),
            detail::apply_diff(st.d1[1], f, g),
            detail::apply_diff(st.d2[0], f, g),
            detail::apply_diff(st.d2[1], f, g),
            detail::apply_diff(st.d2[2], f, g)};
  }

  GraphGeometry<double> geometry(const std::vector<double>& f, std::size_t g) const {
    const auto x = inputs(f, g);
    return graph_geometry<double>(jets_[g], eps(), x[0], x[1], x[2], x[3], x[4], x[5]);
  }

  // Partial derivatives of K in the six jet inputs, by complex step.
  std::array<double, 6> partials(const std::array<double, 6>& x, std::size_t g) const {
    using C = std::complex<double>;
    constexpr double step = 1e-30;
    std::array<double, 6> out;
    for (int k = 0; k < 6; ++k) {
      std::array<C, 6> z;
      for (int m = 0; m < 6; ++m) z[m] = C(x[m], m == k ? step : 0.0);
      out[k] = graph_geometry<C>(jets_[g], eps(), z[0], z[1], z[2], z[3], z[4], z[5]).K.imag() / step;
    }
    return out;
  }

  const fields::Differentiator& stencils() const { return d_; }

 private:
  const EndFamily& family_;
  AtlasPtr atlas_;
  fields::Differentiator d_;
  std::vector<SampleJet> jets_;
};

namespace detail {

inline double residual(const GraphOperator& op, const std::vector<double>& f, double K, std::vector<double>* out) {
  const auto& atlas = *op.atlas();
  double m = 0.0;
  for (std::size_t g = 0; g < atlas.size(); ++g) {
    if (atlas.role(g) != fields::SampleRole::owned) continue;
    const double r = op.geometry(f, g).K - K;
    if (!std::isfinite(r)) return std::numeric_limits<double>::infinity();
    if (out) (*out)[g] = r;
    m = std::max(m, std::abs(r));
  }
  return m;
}

// Constant p with mean_x K_{I_p}(x) = K, by bisection above the positivity root.
inline double constant_guess(const EndFamily& f, double K, double root) {
  const auto& atlas = *f.atlas();
  auto mean = [&](double p) {
    double s = 0.0;
    int n = 0;
    for (std::size_t g = 0; g < atlas.size(); ++g) {
      if (atlas.role(g) != fields::SampleRole::owned) continue;
      s += f.curvature(g, p);
      ++n;
    }
    return s / n;
  };
  double lo = root + 1e-9, hi = root + 40.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean(mid) < K ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Homogeneous data: B* has the same trace and determinant at every sample.
inline std::optional<std::pair<double, double>> homogeneous(const EndFamily& f) {
  const auto& atlas = *f.atlas();
  double tr = 0.0, det = 0.0;
  bool first = true;
  for (std::size_t g = 0; g < atlas.size(); ++g) {
    if (!atlas.active(g)) continue;
    const double t = f.datum().Bstar[g].trace(), d = f.datum().Bstar[g].determinant();
    if (first) {
      tr = t;
      det = d;
      first = false;
    } else if (std::abs(t - tr) > 1e-12 || std::abs(d - det) > 1e-12) {
      return std::nullopt;
    }
  }
  return std::make_pair(tr, det);
}

// e^{2p} from -2 tr / (x + s tr + det/x) = K, larger root.
inline double closed_form_leaf(Side side, double tr, double det, double K) {
  const double s = side == Side::hyperbolic ? 1.0 : -1.0;
  // K x^2 + tr (K s + 2) x + K det = 0
  const double a = K, b = tr * (K * s + 2.0), c = K * det;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) throw Error(ErrorKind::unattainable_curvature, "foliation", "no constant leaf of curvature " + num(K));
  const double x = (-b - std::sqrt(disc)) / (2.0 * a);
  return 0.5 * std::log(x);
}

}  // namespace detail

inline void fill_snapshot(const GraphOperator& op, FoliationLeaf& leaf) {
  const AtlasPtr& atlas = op.atlas();
  std::vector<Mat2> I(atlas->size(), Mat2::Zero()), B(atlas->size(), Mat2::Zero());
  for (std::size_t g = 0; g < atlas->size(); ++g) {
    if (atlas->role(g) != fields::SampleRole::owned) continue;
    const auto geo = op.geometry(leaf.graph.values(), g);
    I[g] = geo.I;
    B[g] = geo.I.inverse() * geo.II;
  }
  fields::fill_fringe<fields::MetricTag, Mat2>(I, *atlas);
  fields::fill_fringe<fields::OperatorTag, Mat2>(B, *atlas);
  leaf.I = MetricField(atlas, "I_leaf", std::move(I));
  leaf.B = OperatorField(atlas, "B_leaf", std::move(B));
  leaf.III = fields::pullback(leaf.I, leaf.B, "III_leaf");
}

inline FoliationLeaf solve_leaf(const EndFamily& f, double K, const LeafOptions& opt = {}) {
  if (f.side() == Side::hyperbolic && !(K > -1.0 && K < 0.0)) {
    throw Error(ErrorKind::unattainable_curvature, "foliation", "K = " + num(K) + " outside (-1, 0)");
  }
  const AttainableRange range = attainable_range(f);
  if (!(K > range.low && K < range.high)) {
    throw Error(ErrorKind::unattainable_curvature, "foliation",
                "K = " + num(K) + " outside the attainable range (" + num(range.low) + ", " + num(range.high) + ")");
  }
  const AtlasPtr& atlas = f.atlas();
  const GraphOperator op(f, opt.order);
  FoliationLeaf leaf;
  leaf.K = K;
  leaf.side = f.side();

  const auto hom = detail::homogeneous(f);
  if (hom && !opt.initial_shift) {
    const double p = detail::closed_form_leaf(f.side(), hom->first, hom->second, K);
    leaf.graph = ScalarField(atlas, "graph", p);
    leaf.closed_form = true;
    leaf.residual = detail::residual(op, leaf.graph.values(), K, nullptr);
    leaf.history = {leaf.residual};
    fill_snapshot(op, leaf);
    return leaf;
  }

  std::vector<double> v(atlas->size(), detail::constant_guess(f, K, range.root) + opt.initial_shift.value_or(0.0));
  fields::fill_fringe<fields::ScalarTag, double>(v, *atlas);
  const detail::Expansion P(*atlas);
  const int n = P.owned();
  std::vector<double> R(atlas->size(), 0.0);
  double res = detail::residual(op, v, K, &R);
  leaf.history.push_back(res);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analyzed = false;
  int it = 0;
  while (res > opt.tol) {
    if (it == opt.max_iter) {
      std::string hist;
      for (double h : leaf.history) hist += " " + fields::fmt(h);
      throw Error(ErrorKind::non_convergence, "foliation",
                  "Newton did not converge in " + std::to_string(opt.max_iter) + " iterations; residuals:" + hist);
    }
    ++it;
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs(n);
    for (std::size_t g = 0; g < atlas->size(); ++g) {
      if (atlas->role(g) != fields::SampleRole::owned) continue;
      const int row = P.index(g);
      rhs[row] = -R[g];
      const auto x = op.inputs(v, g);
      const auto dk = op.partials(x, g);
      std::map<std::size_t, double> coef;
      coef[g] += dk[0];
      const auto& st = op.stencils().at(g);
      const fields::WeightList* lists[5] = {&st.d1[0], &st.d1[1], &st.d2[0], &st.d2[1], &st.d2[2]};
      for (int k = 0; k < 5; ++k) {
        for (const auto& [b, w] : *lists[k]) {
          coef[b] += dk[k + 1] * w;
          coef[g] -= dk[k + 1] * w;
        }
      }
      for (const auto& [b, c] : coef) {
        for (const auto& [col, pv] : P.row(b)) trip.emplace_back(row, col, c * pv);
      }
    }
    Eigen::SparseMatrix<double> J(n, n);
    J.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) {
      throw Error(ErrorKind::non_convergence, "foliation", "singular Newton matrix at iteration " + std::to_string(it));
    }
    const Eigen::VectorXd delta = lu.solve(rhs);

    double alpha = 1.0;
    bool accepted = false;
    std::vector<double> trial;
    std::vector<double> Rt(atlas->size(), 0.0);
    double rt = 0.0;
    for (int halving = 0; halving <= 8; ++halving) {
      trial = v;
      for (std::size_t g = 0; g < atlas->size(); ++g) {
        if (atlas->role(g) == fields::SampleRole::owned) trial[g] += alpha * delta[P.index(g)];
      }
      fields::fill_fringe<fields::ScalarTag, double>(trial, *atlas);
      rt = detail::residual(op, trial, K, &Rt);
      if (rt < res) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      std::string hist;
      for (double h : leaf.history) hist += " " + fields::fmt(h);
      throw Error(ErrorKind::non_convergence, "foliation", "line search stalled; residuals:" + hist);
    }
    v = std::move(trial);
    R = std::move(Rt);
    res = rt;
    leaf.history.push_back(res);
  }
  leaf.iterations = it;
  leaf.residual = res;
  leaf.graph = ScalarField(atlas, "graph", std::move(v));
  fill_snapshot(op, leaf);
  return leaf;
}

// Residual, positivity and an intrinsic curvature cross-check of a solved leaf.
inline Report leaf_audit(const FoliationLeaf& leaf, double tol = 1e-6) {
  const auto& atlas = *leaf.I.atlas();
  double min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < atlas.size(); ++g) {
    if (atlas.role(g) == fields::SampleRole::owned) min_eig = std::min(min_eig, ordered_eigenvalues(leaf.B[g]).second);
  }
  const std::vector<double> target(atlas.size(), leaf.K);
  const auto intrinsic = fields::curvature_refinement(leaf.I.values(), target, leaf.I.atlas(), 1e-6);
  Report r;
  r.items.push_back({"residual", leaf.residual <= tol, leaf.residual, "max |K_leaf - K|"});
  r.items.push_back({"positive", min_eig > 0.0, min_eig, "smallest principal curvature"});
  r.items.push_back({"intrinsic_curvature", intrinsic.pass, intrinsic.residual_h,
                     "Brioschi curvature of the leaf metric vs K: " + fields::fmt(intrinsic.residual_h) + " at h, " +
                         fields::fmt(intrinsic.residual_2h) + " at 2h"});
  return r;
}

struct Sweep {
  std::vector<FoliationLeaf> leaves;
  std::vector<double> areas;
  std::vector<double> gb_areas;  // empty entries when no signature is given
  Report report;
};

// Leaves for a strictly increasing curvature grid, with nesting and area checks.
inline Sweep foliation_sweep(const EndFamily& f, const std::vector<double>& Ks,
                             const std::optional<fields::ConeSignature>& sig = std::nullopt,
                             const LeafOptions& opt = {}) {
  for (std::size_t k = 1; k < Ks.size(); ++k) {
    if (!(Ks[k] > Ks[k - 1])) {
      throw Error(ErrorKind::out_of_domain, "foliation", "curvature grid must be strictly increasing");
    }
  }
  Sweep s;
  for (double K : Ks) {
    s.leaves.push_back(solve_leaf(f, K, opt));
    s.areas.push_back(fields::area(s.leaves.back().I));
    if (sig) s.gb_areas.push_back(fields::gauss_bonnet_area(*sig, K));
  }
  const auto& atlas = *f.atlas();
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < s.leaves.size(); ++k) {
    for (std::size_t g = 0; g < atlas.size(); ++g) {
      if (atlas.role(g) != fields::SampleRole::owned) continue;
      gap = std::min(gap, s.leaves[k].graph[g] - s.leaves[k - 1].graph[g]);
    }
  }
  const bool nested = s.leaves.size() < 2 || gap > 0.0;
  s.report.items.push_back({"nesting", nested, s.leaves.size() < 2 ? 0.0 : gap, "smallest gap between consecutive leaves"});
  double worst = 0.0, res = 0.0;
  for (std::size_t k = 0; k < s.leaves.size(); ++k) {
    if (sig) worst = std::max(worst, std::abs(s.areas[k] / s.gb_areas[k] - 1.0));
    res = std::max(res, s.leaves[k].residual);
  }
  if (sig) s.report.items.push_back({"gauss_bonnet", worst <= 0.01, worst, "largest relative area deviation"});
  s.report.items.push_back({"residual", res <= 1e-6, res, "largest leaf residual"});
  return s;
}

}  // namespace hyperend::foliation
