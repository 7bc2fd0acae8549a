#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hyperend/fields/curvature.hpp"
#include "hyperend/fixtures/disk_patch.hpp"
#include "hyperend/geom/model_metric.hpp"
#include "hyperend/geom/moebius.hpp"

using namespace hyperend;
using namespace hyperend::geom;
using std::numbers::pi;

namespace {

MoebiusMap random_map(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const Complex a(n(rng), n(rng)), b(n(rng), n(rng)), c(n(rng), n(rng)), d(n(rng), n(rng));
    if (std::abs(a * d - b * c) > 0.1) return {a, b, c, d};
  }
}

double angle_of(const Classification& c) { return std::get<Elliptic>(c).angle; }

}  // namespace

TEST(Moebius, NormalizedDeterminant) {
  const MoebiusMap m(Complex(2, 1), Complex(0, 3), Complex(1, -1), Complex(4, 0));
  EXPECT_LE(std::abs(m.det() - 1.0), 1e-12);
  const MoebiusMap prod = m * m.inverse();
  EXPECT_TRUE(projectively_equal(prod, MoebiusMap::identity()));
}

TEST(Moebius, SingularMatrixRejected) {
  EXPECT_THROW(MoebiusMap(1.0, 2.0, 2.0, 4.0), Error);
}

TEST(Moebius, ComposeIsAssociative) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    const auto a = random_map(rng), b = random_map(rng), c = random_map(rng);
    EXPECT_LE(projective_distance((a * b) * c, a * (b * c)), 1e-10 * (a.norm() * b.norm() * c.norm()));
  }
}

TEST(EllipticAboutAxis, DiagonalNormalForm) {
  const double theta = 0.7;
  const auto m = elliptic_about_axis(SpherePoint(0.0), SpherePoint::infinity(), theta);
  const MoebiusMap expected = MoebiusMap::diagonal(std::polar(1.0, theta / 2));
  EXPECT_TRUE(projectively_equal(m, expected, 1e-12));
  EXPECT_NEAR(std::abs(m.trace()), 2 * std::cos(theta / 2), 1e-10);
}

TEST(EllipticAboutAxis, FullTurnIsIdentity) {
  const auto m = elliptic_about_axis(SpherePoint(0.0), SpherePoint::infinity(), 2 * pi);
  EXPECT_NEAR(std::abs(m.trace()), 2.0, 1e-12);
  EXPECT_TRUE(projectively_equal(m, MoebiusMap::identity(), 1e-12));
}

TEST(EllipticAboutAxis, ConjugatedAxisFixesEndpoints) {
  const SpherePoint p(Complex(-1, 0)), q(Complex(1, 0));
  const auto m = elliptic_about_axis(p, q, pi / 2);
  EXPECT_LE(chordal_distance(m(p), p), 1e-12);
  EXPECT_LE(chordal_distance(m(q), q), 1e-12);
  EXPECT_NEAR(std::abs(m.trace()), 2 * std::cos(pi / 4), 1e-10);
  // Oracle M R M^-1 with M sending (0, inf) to (-1, 1).
  const MoebiusMap frame(1.0, -1.0, 1.0, 1.0);
  const MoebiusMap oracle = MoebiusMap::diagonal(std::polar(1.0, pi / 4)).conjugated_by(frame);
  EXPECT_TRUE(projectively_equal(m, oracle, 1e-12));
}

TEST(EllipticAboutAxis, InfiniteStartPoint) {
  const SpherePoint p = SpherePoint::infinity(), q(Complex(2, 1));
  const auto m = elliptic_about_axis(p, q, 1.1);
  EXPECT_TRUE(m(p).is_infinity());
  EXPECT_LE(chordal_distance(m(q), q), 1e-12);
}

TEST(EllipticAboutAxis, CoincidentEndpointsRejected) {
  try {
    elliptic_about_axis(SpherePoint(Complex(1, 1)), SpherePoint(Complex(1, 1)), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_axis);
    EXPECT_EQ(e.code(), "geom_core.degenerate-axis");
  }
  EXPECT_THROW(elliptic_about_axis(SpherePoint::infinity(), SpherePoint::infinity(), 1.0), Error);
}

TEST(EllipticAboutAxis, AnglesAdd) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 20; ++k) {
    const SpherePoint p(Complex(u(rng), u(rng))), q(Complex(u(rng), u(rng)));
    const double t1 = u(rng), t2 = u(rng);
    const auto lhs = elliptic_about_axis(p, q, t1) * elliptic_about_axis(p, q, t2);
    EXPECT_LE(projective_distance(lhs, elliptic_about_axis(p, q, t1 + t2)), 1e-10 * lhs.norm());
  }
}

TEST(Classify, Examples) {
  EXPECT_NEAR(angle_of(classify(MoebiusMap::diagonal(std::polar(1.0, pi / 6)))), pi / 3, 1e-12);
  EXPECT_TRUE(std::holds_alternative<Parabolic>(classify(MoebiusMap(1.0, 1.0, 0.0, 1.0))));
  EXPECT_TRUE(std::holds_alternative<Identity>(classify(MoebiusMap::identity())));
  const auto h = std::get<Hyperbolic>(classify(MoebiusMap::diagonal(2.0)));
  EXPECT_NEAR(h.length.real(), 2 * std::log(2.0), 1e-12);
  EXPECT_NEAR(h.length.imag(), 0.0, 1e-15);
  const auto lox = std::get<Hyperbolic>(classify(MoebiusMap::diagonal(std::polar(2.0, 0.3))));
  EXPECT_NEAR(lox.length.real(), 2 * std::log(2.0), 1e-12);
  EXPECT_NEAR(std::abs(lox.length.imag()), 0.6, 1e-12);
}

TEST(Classify, ConjugationInvariant) {
  std::mt19937_64 rng(11);
  const MoebiusMap samples[] = {MoebiusMap::diagonal(std::polar(1.0, 0.4)), MoebiusMap::diagonal(3.0),
                                MoebiusMap(1.0, 2.0, 0.0, 1.0)};
  for (int k = 0; k < 20; ++k) {
    const auto a = random_map(rng);
    for (const auto& b : samples) {
      const auto c0 = classify(b);
      const auto c1 = classify(b.conjugated_by(a), 1e-8);
      ASSERT_EQ(c0.index(), c1.index());
      if (std::holds_alternative<Elliptic>(c0)) {
        EXPECT_NEAR(angle_of(c0), angle_of(c1), 1e-6);
      }
      if (std::holds_alternative<Hyperbolic>(c0)) {
        EXPECT_NEAR(std::get<Hyperbolic>(c0).length.real(), std::get<Hyperbolic>(c1).length.real(), 1e-8);
      }
    }
  }
}

TEST(OrientedAxis, RepellingThenAttracting) {
  const auto ax = oriented_axis(MoebiusMap::diagonal(2.0));  // z -> 4z
  EXPECT_NEAR(std::abs(ax[0].value()), 0.0, 1e-14);
  EXPECT_TRUE(ax[1].is_infinity());
  EXPECT_THROW(oriented_axis(MoebiusMap::diagonal(std::polar(1.0, 0.5))), Error);
}

TEST(ModelMetric, Examples) {
  Eigen::VectorXd x2(2);
  x2 << 1.0, 0.3;
  const auto g = model_metric_eval({ModelKind::H2_cone, pi / 2}, x2);
  EXPECT_DOUBLE_EQ(g(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(g(1, 1), std::sinh(1.0) * std::sinh(1.0));

  Eigen::VectorXd x3(3);
  x3 << 0.0, 1.0, 0.2;
  const auto h3 = model_metric_eval({ModelKind::H3_cone, 1.0}, x3);
  EXPECT_DOUBLE_EQ(h3(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(h3(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(h3(2, 2), std::sinh(1.0) * std::sinh(1.0));

  x3 << 0.0, pi / 2, 0.2;
  const auto ds = model_metric_eval({ModelKind::dS3_cone, 1.0}, x3);
  EXPECT_DOUBLE_EQ(ds(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(ds(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(ds(2, 2), 1.0);
}

TEST(ModelMetric, NonPositiveRadiusRejected) {
  Eigen::VectorXd x2(2);
  x2 << 0.0, 0.3;
  EXPECT_THROW(model_metric_eval({ModelKind::H2_cone, 1.0}, x2), Error);
}

TEST(ModelMetric, ConeCurvatureIsMinusOneToSecondOrder) {
  double err[2];
  for (int level = 0; level < 2; ++level) {
    const int n = 32 << level;
    const auto atlas = fixtures::cone_chart(pi / 2, 0.3, 1.5, n + 1, 4 * n);
    const auto g = fields::MetricField::generate(atlas, "h", [&](std::size_t s) {
      Eigen::VectorXd x(2);
      x << atlas->coord(s)[0], atlas->coord(s)[1];
      return Mat2(model_metric_eval({ModelKind::H2_cone, pi / 2}, x));
    });
    const auto k = fields::gauss_curvature(g, 1, 2);
    err[level] = 0.0;
    for (std::size_t s = 0; s < atlas->size(); ++s) err[level] = std::max(err[level], std::abs(k[s] + 1.0));
  }
  EXPECT_LT(err[0], 5e-2);
  EXPECT_GT(std::log2(err[0] / err[1]), 1.8);
}
