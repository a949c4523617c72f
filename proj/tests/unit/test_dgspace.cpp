#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "knpemi/dgspace.hpp"
#include "knpemi/quadrature.hpp"

namespace knpemi {
namespace {

using testing::make_space;
using testing::unit_square;

double factorial(int n) { return std::tgamma(n + 1.0); }

// Trace of `u` on one side of a facet quadrature point.
double trace(const DgField& u, const FacetQuadrature& fq, int q, int side) {
  const auto coeffs = u.cell_values(fq.cell[side]);
  double s = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) s += coeffs[i] * fq.point[q].side[side].value[i];
  return s;
}

TEST(Quadrature, GaussLegendreIntegratesMonomials) {
  for (int n = 1; n <= 6; ++n) {
    const LineRule r = gauss_legendre(n);
    ASSERT_EQ(static_cast<int>(r.size()), n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.points[q], k);
      EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << "n=" << n << " k=" << k;
    }
  }
}

TEST(Quadrature, TriangleRulesIntegrateMonomialsToDeclaredDegree) {
  for (int d = 0; d <= 10; ++d) {
    for (const TriangleRule& r : {triangle_rule(d), collapsed_gauss_rule(d)}) {
      ASSERT_GE(r.degree, d);
      for (int a = 0; a <= d; ++a) {
        for (int b = 0; a + b <= d; ++b) {
          double s = 0.0;
          for (std::size_t q = 0; q < r.size(); ++q) {
            s += r.weights[q] * std::pow(r.points[q].x, a) * std::pow(r.points[q].y, b);
          }
          const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
          EXPECT_LT(std::abs(s - exact), 1e-12 * exact) << "degree " << d << " x^" << a << " y^" << b;
        }
      }
    }
  }
}

TEST(Quadrature, StoredRulesHavePositiveInteriorPoints) {
  for (int d = 1; d <= 6; ++d) {
    const TriangleRule r = triangle_rule(d);
    for (std::size_t q = 0; q < r.size(); ++q) {
      EXPECT_GT(r.weights[q], 0.0);
      EXPECT_GT(r.points[q].x, 0.0);
      EXPECT_GT(r.points[q].y, 0.0);
      EXPECT_LT(r.points[q].x + r.points[q].y, 1.0);
    }
  }
}

class Basis : public ::testing::TestWithParam<int> {};

TEST_P(Basis, NodalAndPartitionOfUnity) {
  const int p = GetParam();
  const int n = local_dof_count(p);
  EXPECT_EQ(n, (p + 1) * (p + 2) / 2);
  const auto nodes = reference_nodes(p);
  std::array<double, kMaxLocalDofs> v{};
  std::array<Point2, kMaxLocalDofs> g{};
  for (int j = 0; j < n; ++j) {
    reference_basis(p, nodes[j], std::span(v).first(n), std::span(g).first(n));
    for (int i = 0; i < n; ++i) EXPECT_NEAR(v[i], i == j ? 1.0 : 0.0, 1e-15);
  }
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    Point2 r{u(rng), u(rng)};
    if (r.x + r.y > 1.0) r = {1.0 - r.x, 1.0 - r.y};
    reference_basis(p, r, std::span(v).first(n), std::span(g).first(n));
    double sum = 0.0;
    Point2 gsum;
    for (int i = 0; i < n; ++i) {
      sum += v[i];
      gsum = gsum + g[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
    EXPECT_NEAR(gsum.x, 0.0, 1e-13);
    EXPECT_NEAR(gsum.y, 0.0, 1e-13);
  }
}

TEST_P(Basis, InterpolationIsExactForRandomPolynomialsOfDegreeP) {
  const int p = GetParam();
  const auto space = make_space(unit_square(4), p);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double a0 = u(rng), ax = u(rng), ay = u(rng), axx = u(rng), axy = u(rng), ayy = u(rng);
    const double q = p == 2 ? 1.0 : 0.0;
    const PointFunction f = [=](Point2 x, int) {
      return a0 + ax * x.x + ay * x.y + q * (axx * x.x * x.x + axy * x.x * x.y + ayy * x.y * x.y);
    };
    const DgField fh = interpolate(space, f);
    EXPECT_LE(l2_error(fh, f), 1e-12);
    // gradient check at cell centroids
    for (Index c = 0; c < space->mesh().num_cells(); c += 7) {
      const Point2 r{1.0 / 3.0, 1.0 / 3.0};
      const Point2 x = space->geometry(c).to_physical(r);
      const Point2 gh = fh.gradient(c, r);
      EXPECT_NEAR(gh.x, ax + q * (2 * axx * x.x + axy * x.y), 1e-11);
      EXPECT_NEAR(gh.y, ay + q * (axy * x.x + 2 * ayy * x.y), 1e-11);
    }
  }
}

TEST_P(Basis, ContinuousInterpolantHasNoJumps) {
  const int p = GetParam();
  const auto space = make_space(unit_square(8), p);
  const DgField u = interpolate(space, [](Point2 x, int) { return std::sin(3.0 * x.x) * std::exp(x.y); });
  FacetQuadrature fq;
  for (Index f = 0; f < space->mesh().num_facets(); ++f) {
    if (space->mesh().facet(f).cls == FacetClass::Exterior) continue;
    space->facet_quadrature(f, fq);
    double jump = 0.0;
    for (int q = 0; q < fq.num_points; ++q) jump += fq.point[q].weight * (trace(u, fq, q, 0) - trace(u, fq, q, 1));
    // vertices and p = 2 edge nodes are shared, so traces coincide to round-off
    EXPECT_NEAR(jump, 0.0, 1e-14);
  }
}

INSTANTIATE_TEST_SUITE_P(Degrees, Basis, ::testing::Values(1, 2));

TEST(DgSpace, DofLayoutAndConstantInterpolation) {
  const auto space = make_space(unit_square(4), 2);
  EXPECT_EQ(space->local_size(), 6);
  EXPECT_EQ(space->size(), 32 * 6);
  EXPECT_EQ(space->dof(3, 2), 3 * 6 + 2);
  const DgField three = interpolate(space, [](Point2, int) { return 3.0; });
  for (double v : three.values()) EXPECT_EQ(v, 3.0);
}

TEST(DgSpace, PiecewiseConstantsReproduceTags) {
  const auto space = make_space(unit_square(16), 1);
  const DgField tag = interpolate(space, [](Point2, int t) { return static_cast<double>(t); });
  for (Index c = 0; c < space->mesh().num_cells(); ++c) {
    for (double v : tag.cell_values(c)) EXPECT_EQ(v, space->mesh().cell_tag(c));
  }
}

TEST(DgSpace, MembraneJumpAndAverageOfIndicator) {
  const auto space = make_space(unit_square(8), 1);
  const DgField u = interpolate(space, [](Point2, int t) { return t == kEcsTag ? 0.0 : 1.0; });
  FacetQuadrature fq;
  int checked = 0;
  for (Index f = 0; f < space->mesh().num_facets(); ++f) {
    if (space->mesh().facet(f).cls != FacetClass::Membrane) continue;
    space->facet_quadrature(f, fq);
    for (int q = 0; q < fq.num_points; ++q) {
      const double a = trace(u, fq, q, 0), b = trace(u, fq, q, 1);
      EXPECT_NEAR(a - b, 1.0, 1e-14);
      EXPECT_NEAR(0.5 * (a + b), 0.5, 1e-14);
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(DgSpace, FacetTracesMatchQuadratureTraces) {
  const auto space = make_space(unit_square(4), 2);
  const DgField u = interpolate(space, [](Point2 x, int t) { return x.x * x.x + (t + 1) * x.y; });
  for (Index f = 0; f < space->mesh().num_facets(); ++f) {
    const Facet& fc = space->mesh().facet(f);
    if (fc.cls == FacetClass::Exterior) {
      EXPECT_THROW(space->facet_traces(f, 0.5), DomainError);
      continue;
    }
    const FacetQuadrature t = space->facet_traces(f, 0.25);
    const Point2 x = t.point[0].x;
    const Point2 a = space->mesh().vertex(fc.vertex[0]), b = space->mesh().vertex(fc.vertex[1]);
    EXPECT_NEAR(x.x, a.x + 0.25 * (b.x - a.x), 1e-15);
    EXPECT_NEAR(x.y, a.y + 0.25 * (b.y - a.y), 1e-15);
    for (int side = 0; side < 2; ++side) {
      const int tag = space->mesh().cell_tag(t.cell[side]);
      EXPECT_NEAR(trace(u, t, 0, side), x.x * x.x + (tag + 1) * x.y, 1e-13);
    }
  }
}

TEST(DgSpace, L2ErrorBasics) {
  const auto space = make_space(unit_square(16), 1);
  const PointFunction s = [](Point2 x, int) {
    return std::sin(2 * std::numbers::pi * x.x) * std::sin(2 * std::numbers::pi * x.y);
  };
  const DgField sh = interpolate(space, s);
  const PointFunction sh_fn = [&](Point2 x, int) {
    // evaluate the discrete field itself: cell lookup on the structured grid
    const int i = std::min(15, static_cast<int>(x.x * 16)), j = std::min(15, static_cast<int>(x.y * 16));
    const double fx = x.x * 16 - i, fy = x.y * 16 - j;
    const Index c = 2 * (j * 16 + i) + (fy > fx ? 1 : 0);
    const CellGeometry& g = space->geometry(c);
    const double dx = x.x - g.origin.x, dy = x.y - g.origin.y;
    const double det = g.jac[0] * g.jac[3] - g.jac[1] * g.jac[2];
    const Point2 r{(g.jac[3] * dx - g.jac[1] * dy) / det, (-g.jac[2] * dx + g.jac[0] * dy) / det};
    return sh.eval(c, r);
  };
  EXPECT_LT(l2_error(sh, sh_fn), 1e-12);
  const DgField zero(space, 0.0);
  EXPECT_NEAR(l2_error(zero, [](Point2, int) { return 1.0; }), 1.0, 1e-14);
}

TEST(DgSpace, InterpolationErrorDropsFourfold) {
  const PointFunction s = [](Point2 x, int) {
    return std::sin(2 * std::numbers::pi * x.x) * std::sin(2 * std::numbers::pi * x.y);
  };
  const double e16 = l2_error(interpolate(make_space(unit_square(16), 1), s), s);
  const double e32 = l2_error(interpolate(make_space(unit_square(32), 1), s), s);
  EXPECT_NEAR(e16 / e32, 4.0, 0.15 * 4.0);
}

TEST(DgSpace, ProjectionIsExactOnTheSpaceAndIntegratesArea) {
  const auto space = make_space(unit_square(8), 2);
  const PointFunction q = [](Point2 x, int) { return 1.0 + x.x * x.y - 2.0 * x.y * x.y; };
  EXPECT_LT(l2_error(l2_projection(space, q), q), 1e-12);
  const DgField one(space, 1.0);
  EXPECT_NEAR(integrate(one), 1.0, 1e-14);
  EXPECT_NEAR(integrate(one, 1), 0.25, 1e-14);
  EXPECT_NEAR(integrate(*space, q, 4), 1.0 + 0.25 - 2.0 / 3.0, 1e-14);
}

}  // namespace
}  // namespace knpemi
