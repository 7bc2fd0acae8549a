#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hyperend/fields/curvature.hpp"
#include "hyperend/fields/normalized_pair.hpp"
#include "hyperend/fields/signature.hpp"
#include "hyperend/fixtures/disk_patch.hpp"

using namespace hyperend;
using namespace hyperend::fields;
using std::numbers::pi;

namespace {

double max_over_owned(const ScalarField& f, double offset = 0.0) {
  double m = 0.0;
  for (std::size_t g = 0; g < f.size(); ++g) {
    if (f.atlas()->role(g) == SampleRole::owned) m = std::max(m, std::abs(f[g] - offset));
  }
  return m;
}

OperatorField constant_operator(const AtlasPtr& atlas, const Mat2& a, const std::string& role = "b") {
  return OperatorField(atlas, role, a);
}

}  // namespace

TEST(Atlas, RejectsCoarseCharts) {
  EXPECT_THROW(ChartAtlas({Chart::rect(0, {0, 0}, {0.1, 0.1}, {7, 20})}), Error);
}

TEST(Atlas, InterpolationIsFourthOrder) {
  // A periodic strip glued to itself: the last columns copy the first ones.
  auto run = [](int n) {
    const double h = 1.0 / n;
    const Chart c = Chart::rect(0, {0.0, 0.0}, {h, h}, {n + 1, n + 8});
    std::vector<Overlap> ov;
    for (int i = 0; i <= n; ++i) {
      for (int j = n + 4; j < n + 8; ++j) ov.push_back({0, i, j, 0, {i * h, (j - n) * h + 0.37 * h}, Mat2::Identity()});
    }
    auto atlas = std::make_shared<const ChartAtlas>(std::vector<Chart>{c}, ov);
    auto fn = [](double x, double y) { return std::sin(2 * x) * std::cos(3 * y); };
    ScalarField f = ScalarField::generate(atlas, "f", [&](std::size_t g) {
      const auto x = atlas->coord(g);
      return fn(x[0], x[1]);
    });
    fill_fringe(f);
    double err = 0.0;
    for (const Overlap& o : ov) {
      err = std::max(err, std::abs(f[atlas->global(0, o.i, o.j)] - fn(o.at[0], o.at[1])));
    }
    return err;
  };
  const double e1 = run(20), e2 = run(40);
  EXPECT_LT(e1, 1e-4);
  EXPECT_GT(std::log2(e1 / e2), 3.5);
}

TEST(GaussCurvature, HyperbolicCone) {
  const auto atlas = fixtures::cone_chart(2 * pi / 3, 0.2, 1.6, 71, 120);
  const auto k = gauss_curvature(fixtures::cone_metric_field(atlas));
  EXPECT_LT(max_over_owned(k, -1.0), 5e-3);
}

TEST(GaussCurvature, RoundSphere) {
  const auto atlas = fixtures::rect_patch(0.3, 2.8, 0.0, 2.0, 0.01);
  const auto g = MetricField::generate(atlas, "g", [&](std::size_t s) {
    const double phi = atlas->coord(s)[0];
    return mat2(1.0, 0.0, 0.0, std::sin(phi) * std::sin(phi));
  });
  EXPECT_LT(max_over_owned(gauss_curvature(g), 1.0), 1e-3);
}

TEST(GaussCurvature, ConformalFactorOracle) {
  const auto atlas = fixtures::rect_patch(-0.5, 0.5, -0.5, 0.5, 1e-2);
  const auto g = MetricField::generate(atlas, "g", [&](std::size_t s) {
    const auto x = atlas->coord(s);
    return Mat2(std::exp(2 * (x[0] * x[0] - x[1] * x[1])) * Mat2::Identity());
  });
  EXPECT_LE(max_over_owned(gauss_curvature(g)), 1e-4);
}

TEST(GaussCurvature, ScalesInverselyWithMetric) {
  const auto atlas = fixtures::disk_patch(0.4, 0.02);
  const auto g = fixtures::poincare_field(atlas);
  const auto g9 = MetricField::generate(atlas, "g", [&](std::size_t s) { return Mat2(9.0 * g[s]); });
  const auto k = gauss_curvature(g), k9 = gauss_curvature(g9);
  for (std::size_t s = 0; s < atlas->size(); ++s) EXPECT_NEAR(k9[s], k[s] / 9.0, 1e-10);
}

TEST(GaussCurvature, NonPositiveDefiniteNamesSample) {
  const auto atlas = fixtures::disk_patch(0.2, 0.05);
  auto g = fixtures::poincare_field(atlas);
  g[atlas->global(0, 2, 3)] = -Mat2::Identity();
  try {
    gauss_curvature(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::non_positive_definite);
    EXPECT_NE(std::string(e.what()).find("chart 0 index (2, 3)"), std::string::npos);
  }
}

TEST(CurvatureViaMorphism, ConstantMorphisms) {
  const auto atlas = fixtures::disk_patch(0.4, 0.01);
  const auto g = fixtures::poincare_field(atlas);
  const auto kg = gauss_curvature(g);
  const auto ke = curvature_via_morphism(g, constant_operator(atlas, Mat2::Identity()));
  for (std::size_t s = 0; s < atlas->size(); ++s) EXPECT_DOUBLE_EQ(ke[s], kg[s]);

  const auto k3 = curvature_via_morphism(g, constant_operator(atlas, 3.0 * Mat2::Identity()));
  EXPECT_LT(max_over_owned(k3, -1.0 / 9.0), 1e-4);

  // det A = 2 with A Codazzi: compare with the direct curvature of g(A., A.).
  const auto a = constant_operator(atlas, std::sqrt(2.0) * Mat2::Identity());
  const auto kh = curvature_via_morphism(g, a);
  const auto direct = gauss_curvature(pullback(g, a, "h"));
  EXPECT_LT(max_over_owned(kh, -0.5), 1e-3);
  for (std::size_t s = 0; s < atlas->size(); ++s) EXPECT_NEAR(kh[s], direct[s], 1e-9);
}

TEST(CurvatureViaMorphism, SingularMorphismRejected) {
  const auto atlas = fixtures::disk_patch(0.2, 0.05);
  EXPECT_THROW(curvature_via_morphism(fixtures::poincare_field(atlas), constant_operator(atlas, Mat2::Zero())),
               Error);
}

TEST(Codazzi, IdentityIsExact) {
  const auto atlas = fixtures::disk_patch(0.4, 0.02);
  const auto r = codazzi_residual(fixtures::poincare_field(atlas), constant_operator(atlas, Mat2::Identity()));
  EXPECT_EQ(max_over_owned(r), 0.0);
}

TEST(Codazzi, ScalarMultipleMeasuresGradient) {
  const auto atlas = fixtures::disk_patch(0.4, 0.005);
  const auto g = fixtures::poincare_field(atlas);
  auto f = [](double x, double y) { return std::sin(x) + y * y; };
  const auto a = OperatorField::generate(atlas, "fE", [&](std::size_t s) {
    const auto x = atlas->coord(s);
    return Mat2(f(x[0], x[1]) * Mat2::Identity());
  });
  const auto r = codazzi_residual(g, a);
  double err = 0.0;
  for (std::size_t s = 0; s < atlas->size(); ++s) {
    const auto x = atlas->coord(s);
    const double rho = 2.0 / (1.0 - x[0] * x[0] - x[1] * x[1]);
    const double grad = std::hypot(std::cos(x[0]), 2 * x[1]) / rho;
    err = std::max(err, std::abs(r[s] - grad));
  }
  EXPECT_LT(err, 1e-4);
  EXPECT_FALSE(codazzi_refinement(g, a).pass);
}

TEST(Codazzi, HolomorphicDifferentialRefines) {
  const auto atlas = fixtures::disk_patch(0.4, 0.01);
  const auto g = fixtures::poincare_field(atlas);
  const auto a = OperatorField::generate(atlas, "B*", [&](std::size_t s) {
    const auto x = atlas->coord(s);
    const std::complex<double> z(x[0], x[1]);
    const std::complex<double> f = 0.3 + 0.2 * z + std::complex<double>(0.0, 0.4) * z * z;
    const Mat2 req = mat2(f.real(), -f.imag(), -f.imag(), -f.real());
    return Mat2(g[s].inverse() * (0.5 * g[s] + req));
  });
  const auto audit = codazzi_refinement(g, a);
  EXPECT_TRUE(audit.pass);
  EXPECT_GT(audit.ratio, 3.0);
  EXPECT_LT(audit.residual_h, 1e-3);
}

TEST(Eigenvalues, Examples) {
  const auto atlas = fixtures::disk_patch(0.2, 0.05);
  const MetricField flat(atlas, "g", Mat2::Identity());
  auto [l1, m1] = eigenvalue_fields(flat, constant_operator(atlas, 0.5 * Mat2::Identity()));
  EXPECT_DOUBLE_EQ(l1[0], 0.5);
  EXPECT_DOUBLE_EQ(m1[0], 0.5);
  auto [l2, m2] = eigenvalue_fields(flat, constant_operator(atlas, mat2(0.5, 0, 0, 2)));
  EXPECT_DOUBLE_EQ(l2[3], 2.0);
  EXPECT_DOUBLE_EQ(m2[3], 0.5);
  auto [l3, m3] = eigenvalue_fields(flat, constant_operator(atlas, mat2(1, 0.3, 0.3, 1)));
  EXPECT_NEAR(l3[5], 1.3, 1e-15);
  EXPECT_NEAR(m3[5], 0.7, 1e-15);
  EXPECT_THROW(eigenvalue_fields(flat, constant_operator(atlas, mat2(1, 0.3, 0.0, 1))), Error);
}

TEST(NormalizedPair, IdentityPasses) {
  const auto atlas = fixtures::cone_chart(pi / 2, 1e-3, 1.5, 60, 96);
  const auto h = fixtures::cone_metric_field(atlas);
  const auto r = verify_normalized_pair(h, h, constant_operator(atlas, Mat2::Identity()));
  EXPECT_TRUE(r.all_pass());
  EXPECT_EQ(r.items.size(), 5u);
}

TEST(NormalizedPair, ConstantStretchFailsConeLimit) {
  const auto atlas = std::make_shared<const ChartAtlas>(std::vector<Chart>{
      Chart::rect(0, {-0.5, -0.5}, {0.05, 0.05}, {21, 21}), Chart::polar(1, 0.05, 1.0, 20, 40, pi / 2)});
  const MetricField h(atlas, "h", Mat2::Identity());
  const auto b = constant_operator(atlas, mat2(2.0, 0.0, 0.0, 0.5));
  const auto hp = pullback(h, b, "h'");
  const auto r = verify_normalized_pair(h, hp, b);
  EXPECT_TRUE(r.item("self_adjoint").pass);
  EXPECT_TRUE(r.item("unit_determinant").pass);
  EXPECT_TRUE(r.item("codazzi").pass);
  EXPECT_TRUE(r.item("pullback").pass);
  EXPECT_FALSE(r.item("cone_limit").pass);
}

TEST(NormalizedPair, DeterminantPerturbationReported) {
  const auto atlas = fixtures::disk_patch(0.3, 0.05);
  const auto h = fixtures::poincare_field(atlas);
  const auto b = constant_operator(atlas, std::sqrt(1.01) * Mat2::Identity());
  const auto r = verify_normalized_pair(h, pullback(h, b, "h'"), b);
  EXPECT_FALSE(r.item("unit_determinant").pass);
  EXPECT_NEAR(r.item("unit_determinant").value, 0.01, 1e-12);
}

TEST(NormalizedPair, AtlasMismatch) {
  const auto a1 = fixtures::disk_patch(0.3, 0.05), a2 = fixtures::disk_patch(0.3, 0.05);
  const auto h = fixtures::poincare_field(a1);
  EXPECT_THROW(verify_normalized_pair(h, fixtures::poincare_field(a2), constant_operator(a1, Mat2::Identity())),
               Error);
}

TEST(GaussBonnet, Examples) {
  EXPECT_NEAR(gauss_bonnet_area({2, {}}, -1.0), 4 * pi, 1e-12);
  EXPECT_NEAR(gauss_bonnet_area({2, {pi}}, -1.0), 5 * pi, 1e-12);
  EXPECT_NEAR(gauss_bonnet_area({2, {}}, -0.25), 16 * pi, 1e-12);
  EXPECT_NEAR(gauss_bonnet_area({2, {pi / 2}}, -1.0), 5.5 * pi, 1e-12);
  EXPECT_THROW(gauss_bonnet_area({2, {}}, 0.0), Error);
  EXPECT_THROW(gauss_bonnet_area({1, {}}, -1.0), Error);
  for (double k : {-0.1, -0.7, -3.0}) {
    EXPECT_NEAR(gauss_bonnet_area({2, {pi / 2}}, k) * std::abs(k), 5.5 * pi, 1e-12);
  }
}

TEST(Area, HyperbolicConeSector) {
  const auto atlas = fixtures::cone_chart(pi / 2, 1e-3, 1.0, 401, 64);
  const double a = area(fixtures::cone_metric_field(atlas));
  const double exact = pi / 2 * (std::cosh(1.0) - std::cosh(1e-3));
  EXPECT_NEAR(a / exact, 1.0, 1e-5);
}
