#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "knpemi/emi_assembly.hpp"

namespace knpemi {
namespace {

const PhysicalConstants kConsts{};
using testing::EmiCase;
using testing::rest_concentrations;

std::vector<DgField> random_concentrations(const std::shared_ptr<const DgSpace>& space, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<DgField> c;
  for (int k = 0; k < 2; ++k) c.emplace_back(space, testing::random_vector(space->size(), rng, 5.0, 150.0));
  c.push_back(recover_eliminated(c, default_species()));
  return c;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

class EmiDegrees : public ::testing::TestWithParam<int> {};

TEST_P(EmiDegrees, SymmetricWithConstantsInKernelForRandomConductivity) {
  const auto space = testing::make_space(testing::unit_square(8), GetParam());
  const EmiCase c(space, random_concentrations(space, 17));
  const EmiSystem s = c.assemble(default_penalty(GetParam()));
  const CsrMatrix& a = s.system.matrix;
  a.check_invariants();
  EXPECT_LE(a.asymmetry(), 1e-10 * a.norm_inf());
  const std::vector<double> ones(a.rows(), 1.0);
  EXPECT_LE(max_abs(a * ones), 1e-10 * a.norm_inf());
  ASSERT_TRUE(s.system.nullspace.has_value());
  for (double v : a.diagonal_values()) EXPECT_GT(v, 0.0);
  EXPECT_NEAR(std::accumulate(s.system.rhs.begin(), s.system.rhs.end(), 0.0), 0.0, 1e-10 * max_abs(s.system.rhs));
}

TEST_P(EmiDegrees, PenaltyEntersMatrixOnly) {
  const auto space = testing::make_space(testing::unit_square(8), GetParam());
  const EmiCase c(space, random_concentrations(space, 4));
  const EmiSystem a = c.assemble(40.0), b = c.assemble(80.0);
  ASSERT_EQ(a.system.rhs.size(), b.system.rhs.size());
  for (std::size_t i = 0; i < a.system.rhs.size(); ++i) EXPECT_EQ(a.system.rhs[i], b.system.rhs[i]);
  EXPECT_GT(a.system.matrix.add(b.system.matrix, -1.0).norm_inf(), 0.0);
}

TEST_P(EmiDegrees, ModelAMatrixIsPositiveOnMeanFreeVectors) {
  const int p = GetParam();
  const auto space = testing::make_space(testing::unit_square(16), p);
  const EmiCase c(space, rest_concentrations(space));
  const EmiSystem s = c.assemble(20.0 * 2.0 * p);
  EXPECT_GT(rayleigh_probe(s.system.matrix, 20, *s.system.nullspace), 0.0);
}

INSTANTIATE_TEST_SUITE_P(Degrees, EmiDegrees, ::testing::Values(1, 2));

TEST(EmiAssembly, ZeroDataGivesZeroRhsAndConstantSolution) {
  const auto space = testing::make_space(testing::unit_square(8), 1);
  std::vector<DgField> concs;
  for (double v : {50.0, 20.0, 70.0}) concs.emplace_back(space, v);
  EmiCase c(space, concs);
  for (InterfacePoint& p : c.iface.points) p.f = {0.0, 0.0};
  const EmiSystem s = c.assemble(40.0);
  EXPECT_LE(max_abs(s.system.rhs), 1e-14);
  const std::vector<double> shift(space->size(), 3.0);
  EXPECT_LE(max_abs(s.system.matrix * shift), 1e-10 * s.system.matrix.norm_inf());
}

TEST(EmiAssembly, TwoTrianglesAreSemidefiniteWithRankDeficiencyOne) {
  const std::vector<Point2> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto mesh = std::make_shared<const Mesh2D>(v, std::vector<std::array<Index, 3>>{{0, 1, 2}, {0, 2, 3}},
                                                   std::vector<int>{0, 0});
  const auto space = std::make_shared<const DgSpace>(mesh, 1);
  const auto sp = default_species();
  // uniform concentration with unit conductivity
  double zzd = 0.0;
  for (const IonSpecies& s : sp) zzd += s.valence * s.valence * s.diffusivity;
  const double conc = 1.0 / (kConsts.faraday * kConsts.psi() * zzd);
  ASSERT_NEAR(conductivity_kappa(std::vector<double>(3, conc), sp, kConsts), 1.0, 1e-12);
  const EmiCase c(space, {DgField(space, conc), DgField(space, conc), DgField(space, conc)});
  ASSERT_EQ(c.membrane.size(), 0u);
  const CsrMatrix a = c.assemble(40.0).system.matrix;
  ASSERT_EQ(a.rows(), 6);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(6, 6);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 6; ++j) d(i, j) = a.at(i, j);
  EXPECT_LE((d - d.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(d).eigenvalues();
  const double tol = 1e-10 * ev.cwiseAbs().maxCoeff();
  EXPECT_NEAR(ev(0), 0.0, tol);
  for (int i = 1; i < 6; ++i) EXPECT_GT(ev(i), tol);
}

TEST(EmiAssembly, InvariantUnderCellRelabeling) {
  const GeometrySpec g = testing::unit_square(8);
  const auto ref_mesh = testing::make_mesh(g);
  std::vector<Index> order(ref_mesh->num_cells());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937 rng(99);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Point2> v;
  for (Index i = 0; i < ref_mesh->num_vertices(); ++i) v.push_back(ref_mesh->vertex(i));
  std::vector<std::array<Index, 3>> t;
  std::vector<int> tags;
  for (Index c : order) {
    t.push_back(ref_mesh->cell(c));
    tags.push_back(ref_mesh->cell_tag(c));
  }
  const auto perm_mesh = std::make_shared<const Mesh2D>(v, t, tags);
  const auto s_ref = std::make_shared<const DgSpace>(ref_mesh, 1);
  const auto s_perm = std::make_shared<const DgSpace>(perm_mesh, 1);
  const EmiCase a(s_ref, rest_concentrations(s_ref)), b(s_perm, rest_concentrations(s_perm));
  const EmiSystem ea = a.assemble(40.0), eb = b.assemble(40.0);
  const double scale = ea.system.matrix.norm_inf();
  for (Index pc = 0; pc < perm_mesh->num_cells(); ++pc) {
    for (Index qc = 0; qc < perm_mesh->num_cells(); ++qc) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          const double x = ea.system.matrix.at(s_ref->dof(order[pc], i), s_ref->dof(order[qc], j));
          const double y = eb.system.matrix.at(s_perm->dof(pc, i), s_perm->dof(qc, j));
          ASSERT_NEAR(x, y, 1e-12 * scale);
        }
      }
    }
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(ea.system.rhs[s_ref->dof(order[pc], i)], eb.system.rhs[s_perm->dof(pc, i)],
                  1e-12 * max_abs(ea.system.rhs) + 1e-300);
    }
  }
}

TEST(EmiAssembly, MassMatrixIsAreaWeighted) {
  const auto space = testing::make_space(testing::unit_square(4), 2);
  const DgPattern pattern(*space);
  const CsrMatrix m = assemble_mass(*space, pattern);
  const std::vector<double> ones(m.rows(), 1.0);
  EXPECT_NEAR(dot(ones, m * std::span<const double>(ones)), 1.0, 1e-14);
  EXPECT_LE(m.asymmetry(), 1e-16);
}

TEST(EmiAssembly, RayleighProbeBasics) {
  EXPECT_NEAR(rayleigh_probe(CsrMatrix::identity(50), 5), 1.0, 1e-14);
  // path Laplacian: constants in the kernel
  const Index n = 20;
  std::vector<Index> r, c;
  std::vector<double> v;
  for (Index i = 0; i + 1 < n; ++i) {
    for (auto [a, b, w] : {std::tuple{i, i, 1.0}, {i + 1, i + 1, 1.0}, {i, i + 1, -1.0}, {i + 1, i, -1.0}}) {
      r.push_back(a);
      c.push_back(b);
      v.push_back(w);
    }
  }
  const CsrMatrix lap = CsrMatrix::from_triplets(n, n, r, c, v);
  const std::vector<double> ones(n, 1.0);
  EXPECT_NEAR(dot(ones, lap * std::span<const double>(ones)), 0.0, 1e-14);
  EXPECT_GT(rayleigh_probe(lap, 10, ones), 0.0);
  EXPECT_EQ(rayleigh_probe(lap, 10, ones, 3u), rayleigh_probe(lap, 10, ones, 3u));
}

TEST(EmiAssembly, MeanConductivityOfUniformState) {
  const auto space = testing::make_space(testing::unit_square(4), 1);
  const std::vector<DgField> concs{DgField(space, 100.0), DgField(space, 4.0), DgField(space, 104.0)};
  const std::vector<double> point{100.0, 4.0, 104.0};
  EXPECT_NEAR(mean_conductivity(*space, concs, default_species(), kConsts),
              conductivity_kappa(point, default_species(), kConsts), 1e-12);
  EXPECT_EQ(default_penalty(1), 40.0);
  EXPECT_EQ(default_penalty(2), 80.0);
}

}  // namespace
}  // namespace knpemi
