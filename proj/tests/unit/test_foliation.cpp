#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hyperend/fixtures/disk_patch.hpp"
#include "hyperend/foliation/embedding.hpp"
#include "hyperend/foliation/leaf_solver.hpp"

using namespace hyperend;
using namespace hyperend::foliation;
using end::build_family;
using fields::MetricField;
using fields::OperatorField;
using fields::SampleRole;
using cplx = std::complex<double>;

namespace {

infinity::InfinityData poly_datum(const fields::AtlasPtr& atlas, cplx a0, cplx a1 = 0.0, cplx a2 = 0.0) {
  const auto q = infinity::make_quad_diff(atlas, [&](cplx z, const fields::Chart&) { return a0 + a1 * z + a2 * z * z; });
  return infinity::data_from_qd(fixtures::poincare_field(atlas), q);
}

double max_diff(const MetricField& a, const MetricField& b) {
  double m = 0.0;
  for (std::size_t g = 0; g < a.size(); ++g) m = std::max(m, max_abs(a[g] - b[g]) / std::max(1.0, max_abs(b[g])));
  return m;
}

double max_diff(const OperatorField& a, const OperatorField& b) {
  double m = 0.0;
  for (std::size_t g = 0; g < a.size(); ++g) m = std::max(m, max_abs(a[g] - b[g]));
  return m;
}

}  // namespace

TEST(DualCurvature, Examples) {
  EXPECT_DOUBLE_EQ(dual_curvature(-0.5), -1.0);
  EXPECT_DOUBLE_EQ(dual_curvature(-0.75), -3.0);
  EXPECT_DOUBLE_EQ(inverse_dual_curvature(-3.0), -0.75);
  EXPECT_LT(dual_curvature(-1e-9), 0.0);
  EXPECT_GT(dual_curvature(-1e-9), -1e-8);
  EXPECT_THROW(dual_curvature(-1.0), Error);
  EXPECT_THROW(dual_curvature(0.0), Error);
  EXPECT_THROW(dual_curvature(0.3), Error);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 0.0);
  for (int k = 0; k < 1000; ++k) {
    double K = u(rng);
    if (K == -1.0 || K == 0.0) continue;
    EXPECT_NEAR(inverse_dual_curvature(dual_curvature(K)), K, 1e-14);
  }
}

class EmbeddingTest : public ::testing::Test {
 protected:
  fields::AtlasPtr atlas = fixtures::disk_patch(0.4, 0.02);
  MetricField h = fixtures::poincare_field(atlas, "h");
  OperatorField E = OperatorField(atlas, "b", Mat2::Identity());
};

TEST_F(EmbeddingTest, PhiK) {
  const auto e = phi_K_data(h, h, E, -0.5);
  for (std::size_t g = 0; g < atlas->size(); g += 37) {
    EXPECT_LE(max_abs(e.I[g] - 2.0 * h[g]), 1e-14);
    EXPECT_LE(max_abs(e.B[g] - Mat2::Identity() / std::sqrt(2.0)), 1e-15);
    EXPECT_NEAR(-1.0 + e.B[g].determinant(), -0.5, 1e-15);
  }
  EXPECT_TRUE(embedding_report(e).all_pass());
  const auto e3 = phi_K_data(h, h, E, -0.75);
  const auto III = e3.III();
  for (std::size_t g = 0; g < atlas->size(); g += 37) EXPECT_LE(max_abs(III[g] - h[g] / 3.0), 1e-14);
  const auto near = phi_K_data(h, h, E, -1.0 + 1e-12);
  EXPECT_LT(near.B[0].determinant(), 1e-11);
}

TEST_F(EmbeddingTest, PsiKd) {
  const auto e = psi_Kd_data(h, h, E, -1.0);
  EXPECT_LE(max_diff(e.I, h), 1e-14);
  EXPECT_NEAR(e.B[5].determinant(), 2.0, 1e-14);
  const auto e3 = psi_Kd_data(h, h, E, -3.0);
  const auto III = e3.III();
  for (std::size_t g = 0; g < atlas->size(); g += 37) EXPECT_LE(max_abs(III[g] - 4.0 / 3.0 * h[g]), 1e-13);
  const auto flat = psi_Kd_data(h, h, E, -1e-12);
  EXPECT_NEAR(flat.B[0].determinant(), 1.0, 1e-11);
  EXPECT_TRUE(embedding_report(e3).all_pass());
}

TEST_F(EmbeddingTest, RejectsNonNormalizedPair) {
  const OperatorField b(atlas, "b", Mat2(1.1 * Mat2::Identity()));
  EXPECT_THROW(phi_K_data(h, fields::pullback(h, b, "h'"), b, -0.5), Error);
}

TEST_F(EmbeddingTest, FuchsianLeafDuality) {
  for (double r : {0.1, 0.7, 2.0, 5.0}) {
    const double c = std::cosh(r), s = std::sinh(r);
    const EmbeddingData e{MetricField::generate(atlas, "I", [&](std::size_t g) { return Mat2(c * c * h[g]); }),
                          OperatorField(atlas, "B", Mat2(std::tanh(r) * Mat2::Identity())), Side::hyperbolic};
    const auto d = dualize_surface(e);
    EXPECT_EQ(d.side, Side::de_sitter);
    for (std::size_t g = 0; g < atlas->size(); g += 53) {
      EXPECT_LE(max_abs(d.I[g] - s * s * h[g]) / max_abs(d.I[g]), 1e-12);
      EXPECT_LE(max_abs(d.B[g] - Mat2(Mat2::Identity() / std::tanh(r))), 1e-12);
    }
    const double K = -1.0 / (c * c), Kd = -1.0 / (s * s);
    const double tol = 1e-12 * std::max(1.0, std::abs(Kd));
    EXPECT_NEAR(dual_curvature(K), Kd, tol);
    EXPECT_NEAR(1.0 - d.B[0].determinant(), Kd, tol);
    const auto back = dualize_surface(d);
    EXPECT_LE(max_diff(back.I, e.I), 1e-10);
    EXPECT_LE(max_diff(back.B, e.B), 1e-10);
  }
}

TEST_F(EmbeddingTest, UmbilicBoundaryRejected) {
  const EmbeddingData e{h, E, Side::hyperbolic};
  EXPECT_THROW(dualize_surface(e), Error);
}

TEST_F(EmbeddingTest, DualOfPhiIsPsi) {
  for (double K : {-0.9, -0.5, -0.2}) {
    const auto d = dualize_surface(phi_K_data(h, h, E, K));
    const auto p = psi_Kd_data(h, h, E, dual_curvature(K));
    EXPECT_LE(max_diff(d.I, p.I), 1e-12);
    EXPECT_LE(max_diff(d.B, p.B), 1e-12);
  }
}

TEST(PushPrincipal, Law) {
  for (double t : {0.0, 0.5, 3.0}) EXPECT_DOUBLE_EQ(push_principal(1.0, t), 1.0);
  EXPECT_DOUBLE_EQ(push_principal(0.37, 0.0), 0.37);
  EXPECT_NEAR(push_principal(0.5, std::atanh(0.5)), 0.8, 1e-15);
  EXPECT_THROW(push_principal(-2.0, std::atanh(0.5)), Error);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  for (int k = 0; k < 100; ++k) {
    const double l = u(rng), m = std::min(u(rng), 0.99 / l);
    double prev = push_principal(l, 0.0) * push_principal(m, 0.0);
    for (int i = 1; i <= 50; ++i) {
      const double t = 0.1 * i;
      const double cur = push_principal(l, t) * push_principal(m, t);
      EXPECT_GT(cur, prev);
      prev = cur;
    }
  }
}

class LeafTest : public ::testing::Test {
 protected:
  fields::AtlasPtr atlas = fixtures::disk_patch(0.3, 0.02);
  infinity::InfinityData fuchsian = poly_datum(atlas, 0.0);
  infinity::InfinityData perturbed = poly_datum(atlas, cplx(0.2, 0.1), cplx(0.15, -0.1), cplx(0.1, 0.05));
};

TEST_F(LeafTest, FuchsianClosedForm) {
  const auto f = build_family(fuchsian, Side::hyperbolic);
  const auto leaf = solve_leaf(f, -0.5);
  EXPECT_TRUE(leaf.closed_form);
  EXPECT_NEAR(leaf.graph[0], std::log(1.0 + std::sqrt(2.0) / 2.0), 1e-12);
  EXPECT_LE(leaf.residual, 1e-8);
  EXPECT_NEAR(solve_leaf(f, -8.0 / 9.0).graph[7], 0.0, 1e-12);
  EXPECT_TRUE(leaf_audit(leaf).all_pass());
}

TEST_F(LeafTest, FuchsianDeSitterLeaf) {
  const auto f = build_family(fuchsian, Side::de_sitter);
  const auto leaf = solve_leaf(f, -1.0);
  // -2 / (x - 1 + 1/(4x)) = -1 with x = e^{2t}
  const double x = std::exp(2.0 * leaf.graph[0]);
  EXPECT_NEAR(x - 1.0 + 0.25 / x, 2.0, 1e-12);
  EXPECT_LE(leaf.residual, 1e-8);
  EXPECT_GT(ordered_eigenvalues(leaf.B[0]).second, 0.0);
}

TEST_F(LeafTest, NewtonConvergesQuadratically) {
  const auto f = build_family(perturbed, Side::hyperbolic);
  LeafOptions opt;
  opt.tol = 1e-13;
  const auto leaf = solve_leaf(f, -0.5, opt);
  EXPECT_FALSE(leaf.closed_form);
  EXPECT_LE(leaf.residual, 1e-8);
  EXPECT_LE(leaf.iterations, 15);
  const auto& h = leaf.history;
  ASSERT_GE(h.size(), 3u);
  // Quadratic decay over the last three iterations: r_{k+1} <= C r_k^2.
  const std::size_t n = h.size();
  EXPECT_LE(h[n - 1], 10.0 * h[n - 2] * h[n - 2] / h[0] + 1e-13);
  EXPECT_LE(h[n - 2], 10.0 * h[n - 3] * h[n - 3] / h[0] + 1e-13);
  const auto audit = leaf_audit(leaf);
  EXPECT_TRUE(audit.item("residual").pass);
  EXPECT_TRUE(audit.item("positive").pass);
}

TEST_F(LeafTest, IntrinsicCurvatureMatches) {
  double dev[2];
  for (int level = 0; level < 2; ++level) {
    const auto a = fixtures::disk_patch(0.3, 0.02 / (1 << level));
    const auto d = poly_datum(a, cplx(0.2, 0.1), cplx(0.15, -0.1), cplx(0.1, 0.05));
    const auto f = build_family(d, Side::hyperbolic);
    const auto leaf = solve_leaf(f, -0.5);
    const auto k = fields::gauss_curvature(leaf.I, 1, 2);
    dev[level] = 0.0;
    const fields::Differentiator stencils(a, 1);
    for (std::size_t g = 0; g < a->size(); ++g) {
      if (stencils.centered(g)) dev[level] = std::max(dev[level], std::abs(k[g] + 0.5));
    }
  }
  EXPECT_LT(dev[0], 1e-3);
  EXPECT_GT(std::log2(dev[0] / dev[1]), 1.5);
}

TEST_F(LeafTest, SolutionIndependentOfInitialGuess) {
  const auto f = build_family(perturbed, Side::hyperbolic);
  LeafOptions a, b;
  a.initial_shift = 0.1;
  b.initial_shift = -0.05;
  const auto la = solve_leaf(f, -0.4, a), lb = solve_leaf(f, -0.4, b);
  double m = 0.0;
  for (std::size_t g = 0; g < atlas->size(); ++g) m = std::max(m, std::abs(la.graph[g] - lb.graph[g]));
  EXPECT_LE(m, 1e-8);
}

TEST_F(LeafTest, PerturbedDeSitterLeaf) {
  const auto f = build_family(perturbed, Side::de_sitter);
  const auto leaf = solve_leaf(f, -1.0);
  EXPECT_LE(leaf.residual, 1e-8);
  EXPECT_TRUE(leaf_audit(leaf).item("positive").pass);
}

TEST_F(LeafTest, SweepIsNested) {
  const auto f = build_family(perturbed, Side::hyperbolic);
  const auto s = foliation_sweep(f, {-0.9, -0.5, -0.1});
  EXPECT_TRUE(s.report.all_pass());
  EXPECT_GT(s.report.item("nesting").value, 0.0);
  // Leaves recede to infinity as K -> 0.
  std::vector<double> Ks;
  for (int k = 0; k < 6; ++k) Ks.push_back(-std::pow(10.0, -0.5 * k - 0.5));
  const auto far = foliation_sweep(build_family(fuchsian, Side::hyperbolic), Ks);
  for (std::size_t k = 1; k < far.leaves.size(); ++k) EXPECT_GT(far.leaves[k].graph[0], far.leaves[k - 1].graph[0] + 0.5);
}

TEST_F(LeafTest, DualSweepNested) {
  const auto f = build_family(perturbed, Side::de_sitter);
  std::vector<double> Kd;
  for (double K : {-0.9, -0.5, -0.1}) Kd.push_back(dual_curvature(K));
  const auto s = foliation_sweep(f, Kd);
  EXPECT_TRUE(s.report.all_pass());
}

TEST_F(LeafTest, GridAndRangeErrors) {
  const auto f = build_family(fuchsian, Side::hyperbolic);
  EXPECT_THROW(foliation_sweep(f, {-0.5, -0.5}), Error);
  try {
    solve_leaf(f, -1.2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "foliation.unattainable-curvature");
  }
  const auto range = attainable_range(f);
  EXPECT_NEAR(range.low, -1.0, 1e-12);
  EXPECT_NEAR(range.root, -0.5 * std::log(2.0), 1e-12);
}
