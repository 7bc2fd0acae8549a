#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <variant>

#include "hyperend/core/error.hpp"

namespace hyperend::geom {

using Complex = std::complex<double>;

// Point of the Riemann sphere: a finite complex number or infinity.
class SpherePoint {
 public:
  SpherePoint() = default;
  explicit SpherePoint(Complex z) : value_(z), infinite_(false) {}
  static SpherePoint infinity() {
    SpherePoint p;
    p.infinite_ = true;
    return p;
  }

  bool is_infinity() const noexcept { return infinite_; }
  Complex value() const noexcept { return value_; }

  // Chordal distance on the unit sphere; well defined at infinity.
  friend double chordal_distance(const SpherePoint& a, const SpherePoint& b) {
    if (a.infinite_ && b.infinite_) return 0.0;
    if (a.infinite_) return 2.0 / std::sqrt(1.0 + std::norm(b.value_));
    if (b.infinite_) return 2.0 / std::sqrt(1.0 + std::norm(a.value_));
    return 2.0 * std::abs(a.value_ - b.value_) /
           std::sqrt((1.0 + std::norm(a.value_)) * (1.0 + std::norm(b.value_)));
  }

 private:
  Complex value_{0.0, 0.0};
  bool infinite_ = false;
};

// SL(2,C) representative of an element of PSL(2,C).  Equality is projective.
class MoebiusMap {
 public:
  MoebiusMap() = default;
  MoebiusMap(Complex a, Complex b, Complex c, Complex d) : m_{a, b, c, d} { normalize(); }

  static MoebiusMap identity() { return {}; }
  static MoebiusMap diagonal(Complex lambda) { return {lambda, 0.0, 0.0, 1.0 / lambda}; }

  Complex a() const noexcept { return m_[0]; }
  Complex b() const noexcept { return m_[1]; }
  Complex c() const noexcept { return m_[2]; }
  Complex d() const noexcept { return m_[3]; }

  Complex det() const noexcept { return m_[0] * m_[3] - m_[1] * m_[2]; }
  Complex trace() const noexcept { return m_[0] + m_[3]; }

  MoebiusMap inverse() const {
    MoebiusMap r;
    r.m_ = {m_[3], -m_[1], -m_[2], m_[0]};
    return r;
  }

  friend MoebiusMap operator*(const MoebiusMap& x, const MoebiusMap& y) {
    MoebiusMap r;
    r.m_ = {x.m_[0] * y.m_[0] + x.m_[1] * y.m_[2], x.m_[0] * y.m_[1] + x.m_[1] * y.m_[3],
            x.m_[2] * y.m_[0] + x.m_[3] * y.m_[2], x.m_[2] * y.m_[1] + x.m_[3] * y.m_[3]};
    r.normalize();
    return r;
  }

  MoebiusMap conjugated_by(const MoebiusMap& g) const { return g * (*this) * g.inverse(); }

  Complex operator()(Complex z) const { return (m_[0] * z + m_[1]) / (m_[2] * z + m_[3]); }

  SpherePoint operator()(const SpherePoint& p) const {
    if (p.is_infinity()) {
      if (std::abs(m_[2]) == 0.0) return SpherePoint::infinity();
      return SpherePoint(m_[0] / m_[2]);
    }
    const Complex den = m_[2] * p.value() + m_[3];
    if (std::abs(den) == 0.0) return SpherePoint::infinity();
    return SpherePoint((m_[0] * p.value() + m_[1]) / den);
  }

  // Complex derivative at a finite point.
  Complex derivative(Complex z) const {
    const Complex den = m_[2] * z + m_[3];
    return 1.0 / (den * den);
  }

  // Largest entrywise difference after choosing the better of the two lifts.
  friend double projective_distance(const MoebiusMap& x, const MoebiusMap& y) {
    double plus = 0.0;
    double minus = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      plus = std::max(plus, std::abs(x.m_[k] - y.m_[k]));
      minus = std::max(minus, std::abs(x.m_[k] + y.m_[k]));
    }
    return std::min(plus, minus);
  }

  friend bool projectively_equal(const MoebiusMap& x, const MoebiusMap& y, double tol = 1e-10) {
    return projective_distance(x, y) <= tol * (1.0 + x.norm());
  }

  double norm() const {
    double s = 0.0;
    for (const auto& e : m_) s += std::norm(e);
    return std::sqrt(s);
  }

  const std::array<Complex, 4>& entries() const noexcept { return m_; }

 private:
  void normalize() {
    const Complex dt = det();
    if (std::abs(dt) == 0.0) {
      throw Error(ErrorKind::out_of_domain, "geom_core", "singular Moebius matrix");
    }
    const Complex s = std::sqrt(dt);
    for (auto& e : m_) e /= s;
  }

  std::array<Complex, 4> m_{Complex(1.0), Complex(0.0), Complex(0.0), Complex(1.0)};
};

// A Moebius map sending 0 to `from` and infinity to `to`.
inline MoebiusMap axis_frame(const SpherePoint& from, const SpherePoint& to) {
  if (chordal_distance(from, to) < 1e-14) {
    throw Error(ErrorKind::degenerate_axis, "geom_core", "axis endpoints coincide");
  }
  if (to.is_infinity()) return {1.0, from.value(), 0.0, 1.0};
  if (from.is_infinity()) return {to.value(), 1.0, 1.0, 0.0};
  return {to.value(), from.value(), 1.0, 1.0};
}

// Rotation by `angle` about the oriented geodesic from `from` to `to`.
inline MoebiusMap elliptic_about_axis(const SpherePoint& from, const SpherePoint& to,
                                      double angle) {
  const MoebiusMap frame = axis_frame(from, to);
  const MoebiusMap rotation = MoebiusMap::diagonal(std::polar(1.0, angle / 2.0));
  return rotation.conjugated_by(frame);
}

struct Identity {};
struct Parabolic {};
struct Elliptic {
  double angle;
};
// Loxodromic elements report a complex length; real when purely hyperbolic.
struct Hyperbolic {
  Complex length;
};

using Classification = std::variant<Identity, Parabolic, Elliptic, Hyperbolic>;

inline Classification classify(const MoebiusMap& m, double tol = 1e-10) {
  const Complex tr = m.trace();
  const Complex tr2 = tr * tr;
  if (std::abs(tr2 - 4.0) <= tol * 4.0) {
    if (projectively_equal(m, MoebiusMap::identity(), std::sqrt(tol))) return Identity{};
    return Parabolic{};
  }
  if (std::abs(tr2.imag()) <= tol * std::max(1.0, std::abs(tr2))) {
    const double t = std::abs(tr.real());
    if (tr2.real() < 4.0) return Elliptic{2.0 * std::acos(std::min(1.0, t / 2.0))};
    return Hyperbolic{Complex(2.0 * std::acosh(t / 2.0), 0.0)};
  }
  // Complex length L with 2 cosh(L/2) = tr, real part chosen nonnegative.
  Complex half = std::acosh(tr / 2.0);
  if (half.real() < 0.0) half = -half;
  return Hyperbolic{2.0 * half};
}

// Fixed points on the sphere; empty optional for the identity.
inline std::optional<std::array<SpherePoint, 2>> fixed_points(const MoebiusMap& m) {
  const Complex a = m.a(), b = m.b(), c = m.c(), d = m.d();
  if (std::abs(c) < 1e-14 * m.norm()) {
    if (std::abs(a - d) < 1e-14 * m.norm()) {
      if (std::abs(b) < 1e-14 * m.norm()) return std::nullopt;
      return std::array<SpherePoint, 2>{SpherePoint::infinity(), SpherePoint::infinity()};
    }
    // z = (a z + b)/d  => z (a - d) = -b.
    return std::array<SpherePoint, 2>{SpherePoint(b / (d - a)), SpherePoint::infinity()};
  }
  const Complex disc = std::sqrt((a - d) * (a - d) + 4.0 * b * c);
  return std::array<SpherePoint, 2>{SpherePoint((a - d - disc) / (2.0 * c)),
                                    SpherePoint((a - d + disc) / (2.0 * c))};
}

// Repelling and attracting fixed points of a loxodromic element, in that order.
inline std::array<SpherePoint, 2> oriented_axis(const MoebiusMap& m) {
  const auto fp = fixed_points(m);
  if (!fp || chordal_distance((*fp)[0], (*fp)[1]) < 1e-9) {
    throw Error(ErrorKind::invalid_multicurve, "geom_core", "element has no hyperbolic axis");
  }
  // The derivative at an attracting finite fixed point has modulus < 1.
  auto multiplier = [&](const SpherePoint& p) {
    if (p.is_infinity()) return 1.0 / std::norm(m.a());  // |d/a| = 1/|a|^2
    return std::abs(m.derivative(p.value()));
  };
  const double m0 = multiplier((*fp)[0]);
  const double m1 = multiplier((*fp)[1]);
  if (std::abs(m0 - m1) < 1e-12) {
    throw Error(ErrorKind::invalid_multicurve, "geom_core", "element is not loxodromic");
  }
  if (m0 < m1) return {(*fp)[1], (*fp)[0]};
  return {(*fp)[0], (*fp)[1]};
}

}  // namespace hyperend::geom
