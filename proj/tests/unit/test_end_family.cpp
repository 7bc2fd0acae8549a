#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "hyperend/end/end_family.hpp"
#include "hyperend/fixtures/disk_patch.hpp"

using namespace hyperend;
using namespace hyperend::end;
using fields::MetricField;
using fields::SampleRole;
using infinity::InfinityData;
using cplx = std::complex<double>;

namespace {

InfinityData poly_datum(const fields::AtlasPtr& atlas, cplx a0, cplx a1 = 0.0, cplx a2 = 0.0) {
  const auto q = infinity::make_quad_diff(atlas, [&](cplx z, const fields::Chart&) { return a0 + a1 * z + a2 * z * z; });
  return infinity::data_from_qd(fixtures::poincare_field(atlas), q);
}

double max_rel(const MetricField& a, const MetricField& b) {
  double m = 0.0;
  for (std::size_t g = 0; g < a.size(); ++g) m = std::max(m, max_abs(a[g] - b[g]) / std::max(1.0, max_abs(b[g])));
  return m;
}

}  // namespace

class EndFamilyTest : public ::testing::Test {
 protected:
  fields::AtlasPtr atlas = fixtures::disk_patch(0.4, 0.02);
  InfinityData fuchsian = poly_datum(atlas, 0.0);
  InfinityData generic = poly_datum(atlas, cplx(0.3, -0.1), cplx(0.2, 0.2), cplx(-0.1, 0.4));
};

TEST_F(EndFamilyTest, FuchsianLeafCurvature) {
  const auto f = build_family(fuchsian, Side::hyperbolic);
  for (std::size_t g = 0; g < atlas->size(); g += 97) {
    EXPECT_NEAR(f.curvature(g, 0.0), -8.0 / 9.0, 1e-14);
    EXPECT_NEAR(f.gauss_rhs(g, 0.0), -8.0 / 9.0, 1e-14);
    const double r = 0.7;
    EXPECT_NEAR(f.curvature(g, r), -2.0 / std::pow(std::exp(r) + 0.5 * std::exp(-r), 2), 1e-14);
    EXPECT_LE(max_abs(f.B(g, 0.0) - Mat2(Mat2::Identity() / 3.0)), 1e-15);
  }
}

TEST_F(EndFamilyTest, LeavesFlattenAtInfinity) {
  const auto f = build_family(generic, Side::hyperbolic);
  const double prev = f.curvature(0, 5.0);
  EXPECT_LT(prev, 0.0);
  EXPECT_GT(f.curvature(0, 10.0), prev);
  EXPECT_GT(f.curvature(0, 15.0), -1e-12);
  EXPECT_LE(max_abs(f.B(0, 15.0) - Mat2::Identity()), 1e-12);
}

TEST_F(EndFamilyTest, DeSitterFuchsianEigenvalue) {
  const auto f = build_family(fuchsian, Side::de_sitter);
  const auto [lam, mu] = eigenvalues_at(f, std::log(2.0));
  EXPECT_NEAR(lam[11], 9.0 / 7.0, 1e-14);
  EXPECT_NEAR(mu[11], 9.0 / 7.0, 1e-14);
  EXPECT_NEAR(f.gauss_rhs(11, 1.0), 1.0 - std::pow((std::exp(1) + 0.5 / std::exp(1)) / (std::exp(1) - 0.5 / std::exp(1)), 2),
              1e-13);
}

TEST(LeafEigenvalue, ClosedForms) {
  for (double r : {0.0, 0.3, 2.0}) EXPECT_DOUBLE_EQ(leaf_eigenvalue(Side::hyperbolic, 0.0, r), 1.0);
  EXPECT_DOUBLE_EQ(leaf_eigenvalue(Side::hyperbolic, 1.0, 0.0), 0.0);
  EXPECT_NEAR(leaf_eigenvalue(Side::hyperbolic, 0.5, std::log(2.0)), 7.0 / 9.0, 1e-15);
  EXPECT_THROW(leaf_eigenvalue(Side::de_sitter, 0.5, 0.5 * std::log(0.5)), Error);
}

TEST_F(EndFamilyTest, SingularLeafNamesSample) {
  const auto f = build_family(fuchsian, Side::de_sitter);
  try {
    eigenvalues_at(f, 0.5 * std::log(0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "end_family.singular-leaf");
    EXPECT_NE(std::string(e.what()).find("chart 0 index (0, 0)"), std::string::npos);
  }
}

TEST_F(EndFamilyTest, ConvexityThresholds) {
  EXPECT_EQ(convexity_threshold(build_family(fuchsian, Side::hyperbolic)), 0.0);
  // q = 14 dz^2 against I* = 4|dz|^2/(1-|z|^2)^2 gives sup lambda* = 1/2 + 14/4 = 4 at z = 0.
  const auto steep = poly_datum(atlas, 14.0);
  for (Side side : {Side::hyperbolic, Side::de_sitter}) {
    const auto f = build_family(steep, side);
    const double r0 = convexity_threshold(f);
    EXPECT_NEAR(r0, std::log(2.0), 5e-8) << to_string(side);
    EXPECT_TRUE(detail::convex(f, r0 + 1e-6));
    EXPECT_FALSE(detail::convex(f, r0 - 1e-6));
  }
}

TEST_F(EndFamilyTest, RecoveryIsExact) {
  const auto fh = build_family(fuchsian, Side::hyperbolic);
  const auto rec = recover_infinity_data(fh, 1.0);
  EXPECT_LE(max_rel(rec.Istar, fuchsian.Istar), 1e-12);
  EXPECT_LE(max_rel(rec.IIstar, fuchsian.IIstar), 1e-12);

  const auto gh = build_family(generic, Side::hyperbolic);
  const auto gd = build_family(generic, Side::de_sitter);
  const auto a = recover_infinity_data(gh, 0.5), b = recover_infinity_data(gh, 2.0), c = recover_infinity_data(gd, 1.0);
  EXPECT_LE(infinity::datum_distance(a, b), 1e-9);
  EXPECT_LE(infinity::datum_distance(a, generic), 1e-9);
  EXPECT_LE(infinity::datum_distance(c, generic), 1e-9);
}

TEST_F(EndFamilyTest, SemigroupLaw) {
  for (Side side : {Side::hyperbolic, Side::de_sitter}) {
    const auto f = build_family(generic, side);
    for (double r : {0.5, 1.3}) {
      for (double s : {0.2, 1.0}) {
        for (std::size_t g = 0; g < atlas->size(); g += 53) {
          const Mat2 m = std::cosh(s) * Mat2::Identity() + std::sinh(s) * f.B(g, r);
          const Mat2 lhs = f.I(g, r + s), rhs = fields::pullback(f.I(g, r), m);
          EXPECT_LE(max_abs(lhs - rhs) / max_abs(lhs), 1e-10) << to_string(side);
        }
      }
    }
  }
}

TEST_F(EndFamilyTest, GaussAlgebra) {
  const auto f = build_family(generic, Side::hyperbolic);
  for (std::size_t g = 0; g < atlas->size(); g += 31) {
    for (double r : {0.1, 1.0, 3.0}) {
      const Mat2& b = generic.Bstar[g];
      const double lhs = (-1.0 + f.B(g, r).determinant()) *
                         (std::exp(2 * r) + b.trace() + std::exp(-2 * r) * b.determinant());
      EXPECT_NEAR(lhs, -2.0 * b.trace(), 1e-12);
      EXPECT_NEAR(b.trace(), 1.0, 1e-12);
    }
  }
}

TEST_F(EndFamilyTest, SecondFormIsHalfDerivative) {
  const auto f = build_family(generic, Side::hyperbolic);
  double err[2];
  for (int k = 0; k < 2; ++k) {
    const double dr = 1e-2 / (1 << k);
    err[k] = 0.0;
    for (std::size_t g = 0; g < atlas->size(); g += 41) {
      const Mat2 fd = (f.I(g, 1.0 + dr) - f.I(g, 1.0 - dr)) / (4.0 * dr);
      err[k] = std::max(err[k], max_abs(fd - f.II(g, 1.0)));
    }
  }
  EXPECT_LT(err[0], 1e-2);
  EXPECT_NEAR(err[0] / err[1], 4.0, 0.1);
  for (std::size_t g = 0; g < atlas->size(); g += 41) {
    EXPECT_LE(max_abs(f.II(g, 1.0) - f.I(g, 1.0) * f.B(g, 1.0)), 1e-12);
  }
}

TEST_F(EndFamilyTest, LeafReportsPass) {
  for (Side side : {Side::hyperbolic, Side::de_sitter}) {
    const auto f = build_family(generic, side);
    const double p = convexity_threshold(f) + 0.5;
    const Report r = leaf_report(f, p);
    for (const auto& it : r.items) EXPECT_TRUE(it.pass) << to_string(side) << " " << it.name << ": " << it.detail;
  }
}

TEST_F(EndFamilyTest, RejectsDatumFailingStar) {
  const MetricField II = MetricField::generate(atlas, "II*", [&](std::size_t g) {
    return Mat2(fuchsian.IIstar[g] + 0.1 * fuchsian.Istar[g]);
  });
  try {
    build_family(infinity::assemble(fuchsian.Istar, II, fuchsian.K), Side::hyperbolic);
    FAIL();
  } catch (const RejectedDatum& e) {
    EXPECT_EQ(e.code(), "end_family.rejected-datum");
    EXPECT_FALSE(e.report().item("trace_identity").pass);
  }
}

TEST_F(EndFamilyTest, LeafCsv) {
  const auto f = build_family(fuchsian, Side::hyperbolic);
  std::istringstream in(leaf_csv(f, 0.5));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "chart_id,i,j,param,K,lambda,mu,det_B,gauss_residual");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  std::size_t owned = 0;
  for (std::size_t g = 0; g < atlas->size(); ++g) owned += atlas->role(g) == SampleRole::owned;
  EXPECT_EQ(rows, owned);
}
