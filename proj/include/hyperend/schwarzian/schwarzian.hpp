#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "hyperend/core/error.hpp"
#include "hyperend/core/format.hpp"
#include "hyperend/core/report.hpp"

namespace hyperend::schwarzian {

// Real scalar underlying a complex type (double for std::complex<double>,
// float128 for boost complex128).
template <class C>
using real_of = std::decay_t<decltype(abs(std::declval<C>()))>;

// Value and first three complex derivatives at a point.
template <class C>
struct Jet {
  C f{}, d1{}, d2{}, d3{};
};

// Jet of g o f from the jet of g at f(z) and the jet of f at z.
template <class C>
Jet<C> compose(const Jet<C>& g, const Jet<C>& f) {
  const C f1 = f.d1, f2 = f.d2, f3 = f.d3;
  return {g.f, g.d1 * f1, g.d2 * f1 * f1 + g.d1 * f2,
          g.d3 * f1 * f1 * f1 + C(3) * g.d2 * f1 * f2 + g.d1 * f3};
}

// Jet of w -> w^p (principal branch) at w.
template <class C>
Jet<C> power_jet(const C& w, const C& p) {
  const C v = pow(w, p);
  return {v, p * v / w, p * (p - C(1)) * v / (w * w), p * (p - C(1)) * (p - C(2)) * v / (w * w * w)};
}

template <class C>
C schwarzian_of_jet(const Jet<C>& j) {
  using R = real_of<C>;
  const R scale = R(1) + abs(j.d2) + abs(j.d3);
  if (!(abs(j.d1) > R(1e-13) * scale)) {
    throw Error(ErrorKind::critical_point, "schwarzian", "f' vanishes at the evaluation point");
  }
  const C q = j.d2 / j.d1;
  return j.d3 / j.d1 - C(R(3) / R(2)) * q * q;
}

// Disk (inner = 0) or annulus about `centre`.
template <class C>
struct Domain {
  C centre{};
  real_of<C> inner = 0;
  real_of<C> outer = 1;

  bool contains(const C& z) const {
    const auto r = abs(z - centre);
    return r < outer && (inner == 0 ? true : r > inner);
  }
};

// Circle stencil with `points` nodes z + h w^k; derivative n picks up the
// Taylor coefficient n + points as its leading error, so the order is `points`.
template <class R>
struct FdOptions {
  R h = R(1e-3);
  int points = 4;
};

template <class C>
class HolomorphicSample {
 public:
  using R = real_of<C>;
  using Fn = std::function<C(const C&)>;
  using JetFn = std::function<Jet<C>(const C&)>;

  explicit HolomorphicSample(Fn f, Domain<C> domain = {C(0), R(0), R(1e300)})
      : f_(std::move(f)), domain_(domain) {}
  HolomorphicSample(Fn f, JetFn jet, Domain<C> domain = {C(0), R(0), R(1e300)})
      : f_(std::move(f)), jet_(std::move(jet)), domain_(domain) {}

  C operator()(const C& z) const { return f_(z); }
  bool has_exact_jet() const noexcept { return static_cast<bool>(jet_); }
  const Domain<C>& domain() const noexcept { return domain_; }

  Jet<C> jet(const C& z, const FdOptions<R>& fd = {}) const {
    if (!domain_.contains(z)) {
      throw Error(ErrorKind::out_of_domain, "schwarzian", "evaluation point outside the sample domain");
    }
    if (jet_) return jet_(z);
    return fd_jet(z, fd);
  }

  Jet<C> fd_jet(const C& z, const FdOptions<R>& fd) const {
    if (fd.points < 4 || !(fd.h > R(0))) {
      throw Error(ErrorKind::out_of_domain, "schwarzian", "stencil needs at least 4 points and h > 0");
    }
    const R tau = R(2) * acos(R(-1));
    C sum[3] = {C(0), C(0), C(0)};
    for (int k = 0; k < fd.points; ++k) {
      const R angle = tau * R(k) / R(fd.points);
      const C w(cos(angle), sin(angle));
      const C v = f_(z + C(fd.h) * w);
      // Accumulate v w^-n for n = 1, 2, 3.
      C winv = C(1) / w, pw = winv;
      for (int n = 0; n < 3; ++n) {
        sum[n] += v * pw;
        pw *= winv;
      }
    }
    const R N = R(fd.points);
    const R h = fd.h;
    return {f_(z), sum[0] / C(N * h), sum[1] * C(R(2) / (N * h * h)), sum[2] * C(R(6) / (N * h * h * h))};
  }

 private:
  Fn f_;
  JetFn jet_;
  Domain<C> domain_;
};

// S(f)(z) = (f''/f')' - (f''/f')^2 / 2, the coefficient of dz^2.
template <class C>
C schwarzian(const HolomorphicSample<C>& f, const C& z, const FdOptions<real_of<C>>& fd = {}) {
  return schwarzian_of_jet(f.jet(z, fd));
}

// g o f, with an exact jet whenever both factors carry one.
template <class C>
HolomorphicSample<C> compose(const HolomorphicSample<C>& g, const HolomorphicSample<C>& f) {
  auto fn = [g, f](const C& z) { return g(f(z)); };
  if (g.has_exact_jet() && f.has_exact_jet()) {
    auto jet = [g, f](const C& z) {
      const Jet<C> jf = f.jet(z);
      return compose(g.jet(jf.f), jf);
    };
    return {fn, jet, f.domain()};
  }
  return HolomorphicSample<C>(fn, f.domain());
}

// |S(g o f)(z) - S(f)(z) - S(g)(f(z)) f'(z)^2|.
template <class C>
real_of<C> cocycle_residual(const HolomorphicSample<C>& f, const HolomorphicSample<C>& g, const C& z,
                            const FdOptions<real_of<C>>& fd = {}) {
  const Jet<C> jf = f.jet(z, fd);
  const C lhs = schwarzian(compose(g, f), z, fd);
  const C rhs = schwarzian_of_jet(jf) + schwarzian(g, jf.f, fd) * jf.d1 * jf.d1;
  return abs(lhs - rhs);
}

// Largest |f_x + i f_y| over an n x n grid of points in the sample domain,
// with central differences of step h; O(h^2) for holomorphic samples.
template <class C>
real_of<C> cauchy_riemann_residual(const HolomorphicSample<C>& f, real_of<C> h, int n = 9) {
  using R = real_of<C>;
  const Domain<C>& d = f.domain();
  const R reach = d.outer > R(1e6) ? R(1) : d.outer;
  R worst = 0;
  const C i(0, 1);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const C z = d.centre + C(reach * (R(2 * a + 1) / R(n) - R(1)), reach * (R(2 * b + 1) / R(n) - R(1)));
      if (!d.contains(z) || !d.contains(z + C(h)) || !d.contains(z - C(h)) || !d.contains(z + i * C(h)) ||
          !d.contains(z - i * C(h))) {
        continue;
      }
      const C fx = (f(z + C(h)) - f(z - C(h))) / C(R(2) * h);
      const C fy = (f(z + i * C(h)) - f(z - i * C(h))) / C(R(2) * h);
      const R r = abs(fx + i * fy);
      if (r > worst) worst = r;
    }
  }
  return worst;
}

// Samples with exact jets.
template <class C>
HolomorphicSample<C> mobius_sample(C a, C b, C c, C d) {
  if (abs(a * d - b * c) == 0) throw Error(ErrorKind::out_of_domain, "schwarzian", "singular Moebius matrix");
  auto fn = [=](const C& z) { return (a * z + b) / (c * z + d); };
  auto jet = [=](const C& z) {
    const C den = c * z + d, det = a * d - b * c;
    const C d1 = det / (den * den);
    return Jet<C>{(a * z + b) / den, d1, C(-2) * c * d1 / den, C(6) * c * c * d1 / (den * den)};
  };
  return {fn, jet};
}

template <class C>
HolomorphicSample<C> power_sample(int k) {
  auto fn = [k](const C& z) { return pow(z, C(k)); };
  auto jet = [k](const C& z) {
    const C kk(k);
    return Jet<C>{pow(z, kk), kk * pow(z, C(k - 1)), kk * C(k - 1) * pow(z, C(k - 2)),
                  kk * C(k - 1) * C(k - 2) * pow(z, C(k - 3))};
  };
  return {fn, jet};
}

template <class C>
HolomorphicSample<C> exp_sample() {
  auto fn = [](const C& z) { return exp(z); };
  auto jet = [](const C& z) {
    const C e = exp(z);
    return Jet<C>{e, e, e, e};
  };
  return {fn, jet};
}

// sum_k coeffs[k] z^k, evaluated by Horner with derivatives.
template <class C>
HolomorphicSample<C> polynomial_sample(std::vector<C> coeffs, Domain<C> domain = {C(0), real_of<C>(0), real_of<C>(1e300)}) {
  auto jet = [coeffs](const C& z) {
    Jet<C> j;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
      j.d3 = j.d3 * z + C(3) * j.d2;
      j.d2 = j.d2 * z + C(2) * j.d1;
      j.d1 = j.d1 * z + j.f;
      j.f = j.f * z + *it;
    }
    return j;
  };
  auto fn = [jet](const C& z) { return jet(z).f; };
  return {fn, jet, domain};
}

// Leading behaviour of S(phi) at a cone point of angle theta, where
// phi(u) = f(u^a)^(1/a) with a = 2 pi / theta and z = u^a.  In z the
// quadratic differential is Q(z) dz^2 with Q = (theta/2pi)^2 (b1 + b2 z + ...) / z.
struct ConeOptions {
  double r_max = 0.05;  // outermost ring radius in z
  double ratio = 0.5;   // radius ratio between consecutive rings
  int rings = 5;
  int samples = 32;  // points per ring, symmetric about the slit on the negative axis
  double slope_band = 0.2;
  double zero_tol = 1e-9;   // |S(phi)| |u|^2 below this counts as identically zero
  double scale_tol = 1e-6;  // relative tolerance of the (theta/2pi)^2 check
  FdOptions<double> fd{};
};

struct ConeExpansion {
  int pole_order = 0;
  double slope = 0.0;
  double slope_band = 0.2;
  std::complex<double> leading_coeff{};  // lim z Q(z)
  std::complex<double> u_coeff{};        // b1, from S(phi) u^(2 - a)
  bool scale_check = true;
  bool vanishing = false;
  std::vector<double> radii;
  std::vector<double> ring_mean;  // mean |Q| per ring
  Report report;
};

inline ConeExpansion cone_schwarzian_expansion(const HolomorphicSample<std::complex<double>>& f, double theta,
                                               const ConeOptions& opt = {}) {
  using cplx = std::complex<double>;
  if (!(theta > 0.0 && theta < M_PI)) {
    throw Error(ErrorKind::out_of_domain, "schwarzian", "cone angle must lie in (0, pi), got " + num(theta));
  }
  if (opt.rings < 2 || opt.samples < 4 || !(opt.r_max > 0.0) || !(opt.ratio > 0.0 && opt.ratio < 1.0)) {
    throw Error(ErrorKind::out_of_domain, "schwarzian", "ring layout needs >= 2 rings, >= 4 samples, 0 < ratio < 1");
  }
  const Jet<cplx> j0 = f.jet(0.0, opt.fd);
  const double scale0 = 1.0 + std::abs(j0.d2) + std::abs(j0.d3);
  if (std::abs(j0.f) > 1e-12 * scale0) {
    throw Error(ErrorKind::invalid_germ, "schwarzian", "germ must fix 0, f(0) = " + num(std::abs(j0.f)));
  }
  if (std::abs(j0.d1) <= 1e-12 * scale0) {
    throw Error(ErrorKind::invalid_germ, "schwarzian", "germ has f'(0) = 0");
  }

  const double a = 2.0 * M_PI / theta;
  const double s = theta / (2.0 * M_PI);
  ConeExpansion out;
  out.slope_band = opt.slope_band;

  struct Ring {
    double r;
    double mean_abs;
    cplx z_coeff, u_coeff;
    double worst_zero;
  };
  std::vector<Ring> rings;
  double r = opt.r_max;
  for (int k = 0; k < opt.rings; ++k, r *= opt.ratio) {
    Ring ring{r, 0.0, 0.0, 0.0, 0.0};
    for (int m = 0; m < opt.samples; ++m) {
      const double arg = -M_PI + (m + 0.5) * 2.0 * M_PI / opt.samples;
      const cplx z = std::polar(r, arg);
      const cplx u = std::polar(std::pow(r, 1.0 / a), arg / a);
      if (!f.domain().contains(z)) {
        throw Error(ErrorKind::out_of_domain, "schwarzian", "ring of radius " + num(r) + " leaves the germ domain");
      }
      // Jet of u -> u^a at u, then f, then w -> w^(1/a).
      const Jet<cplx> inner{z, a * z / u, a * (a - 1.0) * z / (u * u), a * (a - 1.0) * (a - 2.0) * z / (u * u * u)};
      const Jet<cplx> w = compose(f.jet(z, opt.fd), inner);
      const Jet<cplx> phi = compose(power_jet<cplx>(w.f, 1.0 / a), w);
      const cplx S = schwarzian_of_jet(phi);
      const cplx du_dz = u / (a * z);
      const cplx Q = S * du_dz * du_dz;
      ring.mean_abs += std::abs(Q) / opt.samples;
      ring.z_coeff += z * Q / static_cast<double>(opt.samples);
      ring.u_coeff += S * std::pow(u, 2.0 - a) / static_cast<double>(opt.samples);
      ring.worst_zero = std::max(ring.worst_zero, std::abs(S) * std::norm(u) / std::max(1.0, a * a - 1.0));
    }
    rings.push_back(ring);
  }

  double worst_zero = 0.0;
  for (const auto& g : rings) {
    out.radii.push_back(g.r);
    out.ring_mean.push_back(g.mean_abs);
    worst_zero = std::max(worst_zero, g.worst_zero);
  }
  out.vanishing = worst_zero <= opt.zero_tol;

  if (out.vanishing) {
    out.slope = 0.0;
    out.pole_order = 0;
  } else {
    // Least squares slope of log mean|Q| against log r.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(rings.size());
    for (const auto& g : rings) {
      const double x = std::log(g.r), y = std::log(g.mean_abs);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.pole_order = static_cast<int>(std::lround(-out.slope));
    out.leading_coeff = rings.back().z_coeff;
    out.u_coeff = rings.back().u_coeff;
    const double expected = s * s;
    if (std::abs(out.u_coeff) > 0.0) {
      out.scale_check = std::abs(out.leading_coeff / out.u_coeff - expected) <= opt.scale_tol * expected;
    } else {
      out.scale_check = std::abs(out.leading_coeff) == 0.0;
    }
  }

  const double rounded = std::round(out.slope);
  auto& items = out.report.items;
  items.push_back({"pole_order", out.pole_order <= 1, static_cast<double>(out.pole_order),
                   "fitted order " + std::to_string(out.pole_order) + " (at most simple)"});
  items.push_back({"slope_band", std::abs(out.slope - rounded) <= opt.slope_band, out.slope,
                   "slope " + num(out.slope) + " within " + num(opt.slope_band) + " of " + num(rounded)});
  // |Q| |z|^2 must shrink with the ring and |Q| |z| must stay bounded.
  const double first2 = rings.front().mean_abs * rings.front().r * rings.front().r;
  const double last2 = rings.back().mean_abs * rings.back().r * rings.back().r;
  double lo1 = 1e300, hi1 = 0.0;
  for (const auto& g : rings) {
    lo1 = std::min(lo1, g.mean_abs * g.r);
    hi1 = std::max(hi1, g.mean_abs * g.r);
  }
  items.push_back({"no_double_pole", out.vanishing || last2 < first2, last2,
                   "|Q||z|^2 from " + num(first2) + " to " + num(last2)});
  items.push_back({"simple_pole_bounded", out.vanishing || hi1 <= 2.0 * lo1, hi1,
                   "|Q||z| in [" + num(lo1) + ", " + num(hi1) + "]"});
  items.push_back({"scale_check", out.scale_check, std::abs(out.leading_coeff),
                   "z-coefficient / u-coefficient against (theta/2pi)^2 = " + num(s * s)});
  return out;
}

}  // namespace hyperend::schwarzian
