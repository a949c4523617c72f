#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "knpemi/physics.hpp"

namespace knpemi {
namespace {

const PhysicalConstants kConsts{};

std::vector<IonSpecies> two_ions() {
  return {{"Na", 1, 1e-9, 0.0, 0.0, 0.0, false}, {"Cl", -1, 2e-9, 0.0, 0.0, 0.0, true}};
}

std::vector<double> ics_rest() { return {12.0, 125.0, 137.0}; }
std::vector<double> ecs_rest() { return {100.0, 4.0, 104.0}; }

TEST(Physics, DefaultSpeciesAreElectroneutral) {
  const auto sp = default_species();
  ASSERT_EQ(sp.size(), 3u);
  EXPECT_EQ(sp[eliminated_index(sp)].name, "Cl");
  EXPECT_EQ(check_electroneutrality(sp), 0.0);
}

TEST(Physics, ElectroneutralityOfTwoIons) {
  auto sp = two_ions();
  sp[0].c_ics = sp[0].c_ecs = 1.0;
  sp[1].c_ics = sp[1].c_ecs = 1.0;
  EXPECT_EQ(check_electroneutrality(sp), 0.0);
  sp[0].c_ics = 2.0;
  EXPECT_EQ(check_electroneutrality(sp), 1.0);
}

TEST(Physics, SpeciesValidation) {
  auto none = default_species();
  none[2].eliminated = false;
  EXPECT_THROW(validate_species(none), ConfigError);
  auto zero_d = default_species();
  zero_d[0].diffusivity = 0.0;
  EXPECT_THROW(validate_species(zero_d), ConfigError);
  auto neutral = default_species();
  neutral[1].valence = 0;
  EXPECT_THROW(validate_species(neutral), ConfigError);
  EXPECT_THROW(species_index(default_species(), "Ca"), ConfigError);
  EXPECT_EQ(species_index(default_species(), "K"), 1u);
}

TEST(Physics, RecoverEliminated) {
  const auto sp = default_species();
  const auto space = testing::make_space(testing::unit_square(4), 1);
  const std::vector<DgField> solved{DgField(space, 100.0), DgField(space, 4.0)};
  const DgField cl = recover_eliminated(solved, sp);
  for (double v : cl.values()) EXPECT_NEAR(v, 104.0, 1e-12);

  const std::vector<DgField> zeros{DgField(space, 0.0), DgField(space, 0.0)};
  const DgField none = recover_eliminated(zeros, sp);
  for (double v : none.values()) EXPECT_EQ(v, 0.0);

  std::mt19937 rng(5);
  const std::vector<DgField> a{DgField(space, testing::random_vector(space->size(), rng, 0, 50)),
                               DgField(space, testing::random_vector(space->size(), rng, 0, 50))};
  std::vector<DgField> twice = a;
  for (DgField& f : twice)
    for (double& v : f.values()) v *= 2.0;
  const DgField ra = recover_eliminated(a, sp), r2 = recover_eliminated(twice, sp);
  for (Index i = 0; i < ra.size(); ++i) {
    EXPECT_NEAR(r2.values()[i], 2.0 * ra.values()[i], 1e-12 * std::abs(ra.values()[i]));
    const double defect = a[0].values()[i] + a[1].values()[i] - ra.values()[i];
    EXPECT_LE(std::abs(defect), 1e-12 * std::max(1.0, ra.values()[i]));
  }
}

TEST(Physics, NernstPotential) {
  EXPECT_EQ(nernst_potential(7.0, 7.0, 1, kConsts), 0.0);
  const double rt_f = kConsts.gas_constant * kConsts.temperature / kConsts.faraday;
  EXPECT_NEAR(nernst_potential(4.0, 125.0, 1, kConsts), rt_f * std::log(4.0 / 125.0), 1e-15);
  EXPECT_NEAR(nernst_potential(4.0, 125.0, 1, kConsts), -0.0890, 5e-5);
  EXPECT_NEAR(nernst_potential(100.0, 12.0, 1, kConsts), 0.0548, 5e-5);
  EXPECT_NEAR(nernst_potential(3.0, 11.0, -1, kConsts), -nernst_potential(11.0, 3.0, -1, kConsts), 1e-16);
  EXPECT_NEAR(nernst_potential(3.0, 11.0, 2, kConsts), 0.5 * nernst_potential(3.0, 11.0, 1, kConsts), 1e-16);
  EXPECT_THROW(nernst_potential(0.0, 1.0, 1, kConsts), DomainError);
  EXPECT_THROW(nernst_potential(1.0, -1.0, 1, kConsts), DomainError);
}

TEST(Physics, NernstClampedCounts) {
  ClampCounter clamps;
  const double e = nernst_clamped(-1.0, 1.0, 1, kConsts, clamps);
  EXPECT_EQ(clamps.count, 1);
  EXPECT_TRUE(std::isfinite(e));
}

TEST(Physics, AlphaFractions) {
  const auto sp = default_species();
  const std::vector<IonSpecies> one{sp[0]};
  EXPECT_DOUBLE_EQ(alpha_fraction(std::vector<double>{5.0}, one, 0), 1.0);

  const auto ce = ecs_rest();
  const double den = 1.33e-9 * 100 + 1.96e-9 * 4 + 2.03e-9 * 104;
  EXPECT_NEAR(alpha_fraction(ce, sp, 0), 1.33e-9 * 100 / den, 1e-14);
  EXPECT_NEAR(alpha_fraction(ce, sp, 0), 0.378, 5e-4);

  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(1e-3, 200.0);
  for (int t = 0; t < 200; ++t) {
    const std::vector<double> c{u(rng), u(rng), u(rng)};
    double sum = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      const double a = alpha_fraction(c, sp, k);
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, 1.0);
      sum += a;
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
  }
  EXPECT_THROW(alpha_fraction(std::vector<double>{0.0, 0.0, 0.0}, sp, 0), DomainError);
}

TEST(Physics, Conductivity) {
  const auto sp = default_species();
  EXPECT_EQ(conductivity_kappa(std::vector<double>{0.0, 0.0, 0.0}, sp, kConsts), 0.0);
  const auto ce = ecs_rest();
  const double oracle = kConsts.faraday * kConsts.psi() * (1.33e-9 * 100 + 1.96e-9 * 4 + 2.03e-9 * 104);
  EXPECT_NEAR(conductivity_kappa(ce, sp, kConsts), oracle, 1e-12 * oracle);
  EXPECT_NEAR(oracle, 1.3136, 1e-3);
  std::vector<double> twice = ce;
  for (double& c : twice) c *= 2.0;
  EXPECT_NEAR(conductivity_kappa(twice, sp, kConsts), 2.0 * oracle, 1e-12 * oracle);

  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> c{u(rng), u(rng), u(rng)};
    const double base = conductivity_kappa(c, sp, kConsts);
    c[t % 3] += u(rng);
    EXPECT_GE(conductivity_kappa(c, sp, kConsts), base);
  }
}

MembraneTrace rest_trace() {
  MembraneTrace tr;
  tr.conc[0] = ics_rest();
  tr.conc[1] = ecs_rest();
  return tr;
}

TEST(Physics, PassiveInterfaceDataAtRest) {
  const auto sp = default_species();
  const MembraneTrace tr = rest_trace();
  ClampCounter clamps;
  const double phi_M = -0.06774, dt = 1e-4;
  const auto cur = leak_currents(phi_M, tr, sp, kConsts, clamps);
  const double e_na = nernst_potential(100, 12, 1, kConsts), e_k = nernst_potential(4, 125, 1, kConsts);
  const double i_ch = 1.0 * (phi_M - e_na) + 4.0 * (phi_M - e_k);
  EXPECT_NEAR(cur[0] + cur[1] + cur[2], i_ch, 1e-15);
  EXPECT_NEAR(i_ch, -0.0376, 2e-4);

  const InterfacePoint p = interface_data_passive(phi_M, tr, kConsts, dt, sp, clamps);
  EXPECT_NEAR(p.C, kConsts.capacitance / dt, 1e-12);
  EXPECT_NEAR(p.f[0], phi_M - dt * i_ch / kConsts.capacitance, 1e-15);
  EXPECT_NEAR(p.f[0], -0.06736, 5e-6);
  EXPECT_EQ(p.f[0], p.f[1]);
  for (int side = 0; side < 2; ++side) {
    const auto& c = tr.conc[side];
    for (std::size_t k = 0; k < sp.size(); ++k) {
      const double alpha = alpha_fraction(c, sp, k);
      EXPECT_NEAR(p.g[k][side], phi_M - dt * cur[k] / (kConsts.capacitance * alpha), 1e-14);
      EXPECT_NEAR(p.C_species[k][side], alpha * kConsts.capacitance / (kConsts.faraday * sp[k].valence * dt), 1e-12);
    }
  }
  EXPECT_EQ(clamps.count, 0);
}

TEST(Physics, ZeroCurrentGivesPhiM) {
  auto sp = default_species();
  for (auto& s : sp) s.g_leak = 0.0;
  ClampCounter clamps;
  const double phi_M = -0.05;
  const InterfacePoint p = interface_data_passive(phi_M, rest_trace(), kConsts, 1e-4, sp, clamps);
  EXPECT_EQ(p.f[0], phi_M);
  for (const auto& g : p.g) {
    EXPECT_EQ(g[0], phi_M);
    EXPECT_EQ(g[1], phi_M);
  }
  const std::vector<double> zero(3, 0.0);
  const InterfacePoint a = interface_data_active(phi_M, zero, rest_trace(), kConsts, 1e-4, sp, clamps);
  EXPECT_EQ(a.f[0], phi_M);
  for (const auto& g : a.g) EXPECT_EQ(g[0], phi_M);
}

TEST(Physics, PassiveFTendsToPhiMAsDtVanishes) {
  const auto sp = default_species();
  ClampCounter clamps;
  double prev = 1.0;
  for (double dt : {1e-4, 1e-6, 1e-8, 1e-10}) {
    const InterfacePoint p = interface_data_passive(-0.06774, rest_trace(), kConsts, dt, sp, clamps);
    const double gap = std::abs(p.f[0] + 0.06774);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev, 1e-9);
  EXPECT_THROW(interface_data_passive(-0.06774, rest_trace(), kConsts, 0.0, sp, clamps), ConfigError);
}

TEST(Physics, ActiveSingleSpeciesCancels) {
  const std::vector<IonSpecies> one{{"Na", 1, 1e-9, 10, 10, 0, false}};
  MembraneTrace tr;
  tr.conc[0] = {10.0};
  tr.conc[1] = {10.0};
  ClampCounter clamps;
  const std::vector<double> cur{3.7};
  const InterfacePoint p = interface_data_active(-0.07, cur, tr, kConsts, 1e-4, one, clamps);
  EXPECT_NEAR(p.g[0][0], -0.07, 1e-15);
  EXPECT_NEAR(p.g[0][1], -0.07, 1e-15);
}

TEST(Physics, ActiveOpposingCurrents) {
  const auto sp = two_ions();
  MembraneTrace tr;
  tr.conc[0] = {10.0, 10.0};
  tr.conc[1] = {20.0, 20.0};
  ClampCounter clamps;
  const double dt = 1e-4, phi_M = -0.07;
  const std::vector<double> cur{0.5, -0.5};
  const InterfacePoint p = interface_data_active(phi_M, cur, tr, kConsts, dt, sp, clamps);
  EXPECT_EQ(p.f[0], phi_M);
  for (int side = 0; side < 2; ++side) {
    const double a1 = alpha_fraction(tr.conc[side], sp, 0);
    EXPECT_NEAR(p.g[0][side], phi_M - dt / (kConsts.capacitance * a1) * 0.5, 1e-14);
  }
}

}  // namespace
}  // namespace knpemi
