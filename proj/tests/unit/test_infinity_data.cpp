#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hyperend/fixtures/disk_patch.hpp"
#include "hyperend/infinity/infinity_data.hpp"

using namespace hyperend;
using namespace hyperend::fields;
using namespace hyperend::infinity;
using std::numbers::pi;
using cplx = std::complex<double>;

namespace {

double max_owned(const AtlasPtr& atlas, const std::function<double(std::size_t)>& fn) {
  double m = 0.0;
  for (std::size_t g = 0; g < atlas->size(); ++g) {
    if (atlas->role(g) == SampleRole::owned) m = std::max(m, fn(g));
  }
  return m;
}

InfinityData poly_datum(const AtlasPtr& atlas, cplx a0, cplx a1, cplx a2) {
  const auto q = make_quad_diff(atlas, [&](cplx z, const Chart&) { return a0 + a1 * z + a2 * z * z; });
  return data_from_qd(fixtures::poincare_field(atlas), q);
}

}  // namespace

TEST(DataFromQd, FuchsianDatum) {
  const auto atlas = fixtures::disk_patch(0.4, 0.02);
  const auto d = poly_datum(atlas, 0.0, 0.0, 0.0);
  for (std::size_t g = 0; g < atlas->size(); ++g) {
    EXPECT_LE(max_abs(d.Bstar[g] - 0.5 * Mat2::Identity()), 1e-15);
    EXPECT_NEAR(d.Bstar[g].determinant(), 0.25, 1e-15);
  }
  EXPECT_TRUE(condition_star_report(d).all_pass());
  EXPECT_LE(condition_star_report(d).item("trace_identity").value, 1e-8);
}

TEST(DataFromQd, MatrixFormula) {
  const auto atlas = fixtures::rect_patch(0, 1, 0, 1, 0.1);
  const auto q = make_quad_diff(atlas, [](cplx, const Chart&) { return cplx(1.0, 0.0); });
  const MetricField I(atlas, "I*", Mat2(2.0 * Mat2::Identity()));
  const auto d = data_from_qd(I, q);
  EXPECT_LE(max_abs(d.Bstar[7] - mat2(1.0, 0.0, 0.0, 0.0)), 1e-15);
  // With Re f = 1, rho = 2: B* = 1/2 E + 1/2 rho^-1 diag(1, -1) = diag(0.75, 0.25).
  const auto q2 = make_quad_diff(atlas, [](cplx, const Chart&) { return cplx(0.5, 0.0); });
  const auto d2 = data_from_qd(I, q2);
  EXPECT_LE(max_abs(d2.Bstar[7] - mat2(0.75, 0.0, 0.0, 0.25)), 1e-15);
}

TEST(DataFromQd, TraceIsOne) {
  const auto atlas = fixtures::disk_patch(0.4, 0.02);
  const auto d = poly_datum(atlas, cplx(0.3, -0.1), cplx(0.2, 0.2), cplx(-0.1, 0.4));
  EXPECT_LE(max_owned(atlas, [&](std::size_t g) { return std::abs(d.Bstar[g].trace() - 1.0); }), 1e-10);
  const auto r = condition_star_report(d);
  EXPECT_TRUE(r.all_pass()) << r.item("codazzi").detail << " / " << r.item("trace_identity").detail;
}

TEST(DataFromQd, SimplePoleAtConeTendsToHalf) {
  const double theta = pi / 2;
  const auto atlas = fixtures::cone_chart(theta, 1e-3, 1.2, 120, 64);
  const auto q = make_quad_diff(atlas, [](cplx z, const Chart&) { return 1.0 / z; }, {1});
  const auto audits = audit_poles(q);
  ASSERT_EQ(audits.size(), 1u);
  EXPECT_EQ(audits[0].order, 1);
  const auto d = data_from_qd(fixtures::cone_metric_field(atlas), q);
  // Deviation of the eigenvalues from 1/2 decreases toward the cone point.
  const Chart& c = atlas->charts()[0];
  double prev = 1e300;
  for (int i = 40; i >= 0; i -= 10) {
    double dev = 0.0;
    for (int j = 0; j < c.dims[1]; ++j) {
      const auto [l, m] = ordered_eigenvalues(d.Bstar[c.local(i, j)]);
      dev = std::max({dev, std::abs(l - 0.5), std::abs(m - 0.5)});
    }
    EXPECT_LT(dev, prev);
    prev = dev;
  }
  EXPECT_LT(prev, 1e-3);
  const auto r = condition_star_report(d);
  EXPECT_TRUE(r.all_pass()) << r.item("codazzi").detail << " / " << r.item("trace_identity").detail;
}

TEST(DataFromQd, DoublePoleRejected) {
  const auto atlas = fixtures::cone_chart(pi / 2, 1e-3, 1.2, 40, 32);
  const auto q = make_quad_diff(atlas, [](cplx z, const Chart&) { return 1.0 / (z * z); });
  try {
    data_from_qd(fixtures::cone_metric_field(atlas), q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "infinity_data.invalid-differential");
  }
}

TEST(DataFromQd, CauchyRiemannResidual) {
  const auto atlas = fixtures::disk_patch(0.4, 0.01);
  const auto q = make_quad_diff(atlas, [](cplx z, const Chart&) { return std::exp(z); });
  EXPECT_LT(cauchy_riemann_residual(q), 1e-4);
  const auto bad = make_quad_diff(atlas, [](cplx z, const Chart&) { return std::conj(z); });
  EXPECT_GT(cauchy_riemann_residual(bad), 0.5);
}

TEST(ConditionStar, TracePerturbationFails) {
  const auto atlas = fixtures::disk_patch(0.4, 0.02);
  const auto d = poly_datum(atlas, 0.0, 0.0, 0.0);
  MetricField II = MetricField::generate(atlas, "II*", [&](std::size_t g) { return Mat2(d.IIstar[g] + 0.1 * d.Istar[g]); });
  const auto r = condition_star_report(assemble(d.Istar, II, d.K));
  EXPECT_FALSE(r.item("trace_identity").pass);
  EXPECT_NEAR(r.item("trace_identity").value, 0.2, 1e-12);
  EXPECT_TRUE(r.item("codazzi").pass);
}

TEST(ConditionStar, NonCodazziFails) {
  const auto atlas = fixtures::disk_patch(0.4, 0.01);
  const auto d = poly_datum(atlas, 0.0, 0.0, 0.0);
  MetricField II = MetricField::generate(atlas, "II*", [&](std::size_t g) {
    const auto x = atlas->coord(g);
    return Mat2(d.IIstar[g] + 0.1 * x[0] * mat2(1.0, 0.0, 0.0, -1.0) * d.Istar[g](0, 0));
  });
  EXPECT_FALSE(condition_star_report(assemble(d.Istar, II, d.K)).item("codazzi").pass);
}

TEST(Gauge, ZeroAndConstant) {
  const auto atlas = fixtures::disk_patch(0.4, 0.02);
  const auto d = poly_datum(atlas, cplx(0.2, 0.1), cplx(0.1, 0.0), 0.0);
  const auto same = gauge_transform(d, ScalarField(atlas, "u", 0.0));
  EXPECT_EQ(datum_distance(same, d), 0.0);
  const double c = 0.3;
  const auto scaled = gauge_transform(d, ScalarField(atlas, "u", c));
  for (std::size_t g = 0; g < atlas->size(); ++g) {
    EXPECT_LE(max_abs(scaled.Istar[g] - std::exp(2 * c) * d.Istar[g]), 1e-12 * max_abs(d.Istar[g]));
    EXPECT_EQ(max_abs(scaled.IIstar[g] - d.IIstar[g]), 0.0);
  }
  const auto back = gauge_transform(scaled, ScalarField(atlas, "u", -c));
  EXPECT_LE(datum_distance(back, d), 1e-14);
}

TEST(Gauge, PreservesConditionStar) {
  const auto atlas = fixtures::disk_patch(0.3, 1e-2);
  const auto d = poly_datum(atlas, cplx(0.2, 0.1), cplx(0.1, -0.2), cplx(0.05, 0.0));
  const auto r0 = condition_star_report(d);
  ASSERT_TRUE(r0.all_pass());
  const auto u = ScalarField::generate(atlas, "u", [&](std::size_t g) { return 0.1 * std::sin(atlas->coord(g)[0]); });
  const auto d2 = gauge_transform(d, u);
  const auto r1 = condition_star_report(d2);
  EXPECT_TRUE(r1.all_pass()) << r1.item("codazzi").detail << " / " << r1.item("trace_identity").detail;
  EXPECT_LE(r1.item("codazzi").value, 10 * std::max(r0.item("codazzi").value, 1e-4));
  EXPECT_LE(r1.item("trace_identity").value, 10 * std::max(r0.item("trace_identity").value, 1e-10));
}

TEST(Gauge, InverseRecoversToSecondOrder) {
  double err[2];
  for (int level = 0; level < 2; ++level) {
    const auto atlas = fixtures::disk_patch(0.3, 0.02 / (1 << level));
    const auto d = poly_datum(atlas, cplx(0.2, 0.1), cplx(0.1, -0.2), 0.0);
    const auto u = ScalarField::generate(atlas, "u", [&](std::size_t g) {
      const auto x = atlas->coord(g);
      return 0.2 * std::sin(x[0] + 2 * x[1]);
    });
    auto minus = u;
    for (auto& v : minus.values()) v = -v;
    err[level] = datum_distance(gauge_transform(gauge_transform(d, u), minus), d);
  }
  EXPECT_LT(err[0], 1e-5);
  EXPECT_GT(std::log2(err[0] / err[1]), 1.8);
}
