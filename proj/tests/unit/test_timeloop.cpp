#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "knpemi/scenario.hpp"
#include "knpemi/timeloop.hpp"

namespace knpemi {
namespace {

SimulationConfig model_a() { return preset("model-a").sim; }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Total ionic content; the scale for relative charge changes.
double ion_content(const SimulationState& s, std::span<const IonSpecies> species) {
  double total = 0.0;
  for (std::size_t k = 0; k < species.size(); ++k) total += std::abs(species[k].valence) * integrate(s.conc[k]);
  return total;
}

TEST(Timeloop, ValidationRejectsBadSettings) {
  SimulationConfig c = model_a();
  c.dt = -1.0;
  EXPECT_THROW(validate(c), ConfigError);
  c = model_a();
  c.degree = 3;
  EXPECT_THROW(validate(c), ConfigError);
  c = model_a();
  c.dt_ode = 2.0 * c.dt;
  EXPECT_THROW(validate(c), ConfigError);
  c = model_a();
  c.species[0].c_ics = 0.0;
  EXPECT_THROW(validate(c), ConfigError);
  c = model_a();
  c.membrane.model = MembraneModel::HodgkinHuxley;
  c.species[1].name = "X";
  EXPECT_THROW(validate(c), ConfigError);
  EXPECT_NO_THROW(validate(model_a()));
}

TEST(Timeloop, InitialStateIsCompartmentwiseRest) {
  const Simulation sim(model_a());
  const SimulationState& s = sim.state();
  EXPECT_EQ(s.step, 0);
  EXPECT_EQ(s.t, 0.0);
  ASSERT_EQ(s.conc.size(), 3u);
  EXPECT_NEAR(integrate(s.conc[0], 1), 12.0 * 0.25, 1e-12);
  EXPECT_NEAR(integrate(s.conc[0], kEcsTag), 100.0 * 0.75, 1e-12);
  for (double v : s.membrane.phi_M) EXPECT_EQ(v, -0.06774);
  EXPECT_EQ(sim.solved_species(), (std::vector<std::size_t>{0, 1}));
}

TEST(Timeloop, NothingDrivesNothing) {
  SimulationConfig c = model_a();
  for (IonSpecies& s : c.species) {
    s.g_leak = 0.0;
    s.c_ecs = s.c_ics;
  }
  Simulation sim(c);
  const SimulationState s0 = sim.state();
  const StepReport r1 = sim.step();
  const SimulationState s1 = sim.state();
  sim.step();
  const SimulationState& s2 = sim.state();
  ASSERT_EQ(r1.knp.size(), 2u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_LE(max_abs_diff(s2.conc[k].values(), s0.conc[k].values()), 1e-10 * c.species[k].c_ics);
  }
  EXPECT_LE(max_abs_diff(s2.membrane.phi_M, s0.membrane.phi_M), 1e-10);
  EXPECT_LE(max_abs_diff(s2.phi.values(), s1.phi.values()), 1e-10);
}

TEST(Timeloop, ReversalConsistentRestStaysAtRest) {
  SimulationConfig c = model_a();
  const PhysicalConstants& k = c.consts;
  double num = 0.0, den = 0.0;
  for (const IonSpecies& s : c.species) {
    if (s.g_leak == 0.0) continue;
    num += s.g_leak * nernst_potential(s.c_ecs, s.c_ics, s.valence, k);
    den += s.g_leak;
  }
  c.phi_M0 = num / den;  // zero total leak current
  Simulation sim(c);
  const std::vector<double> phi0 = sim.state().membrane.phi_M;
  for (int n = 0; n < 10; ++n) sim.step();
  EXPECT_LT(max_abs_diff(sim.state().membrane.phi_M, phi0), 1e-3);
}

TEST(Timeloop, StepsKeepElectroneutralityAndCharge) {
  Simulation sim(model_a());
  const auto& sp = sim.config().species;
  double prev = charge_weighted_mass(sim.state().conc, sp);
  for (int n = 1; n <= 5; ++n) {
    const StepReport r = sim.step();
    EXPECT_EQ(r.step, n);
    EXPECT_NEAR(sim.state().t, n * sim.config().dt, 1e-18);
    EXPECT_TRUE(r.emi.converged);
    EXPECT_LE(r.emi_asymmetry, 1e-10);
    EXPECT_LE(electroneutrality_defect(sim.state().conc, sp), 1e-10);
    const double q = charge_weighted_mass(sim.state().conc, sp);
    EXPECT_LE(std::abs(q - prev), 1e-8 * ion_content(sim.state(), sp));
    prev = q;
  }
}

TEST(Timeloop, PassiveRestDriftMatchesLeakImbalance) {
  // The default rest values are not a passive equilibrium; phi_M moves by about dt * 3.77 V/s per step.
  Simulation sim(model_a());
  const double phi0 = sim.state().membrane.phi_M[0];
  sim.step();
  const double rate = (sim.state().membrane.phi_M[0] - phi0) / sim.config().dt;
  EXPECT_NEAR(rate, 3.77, 0.1);
}

TEST(Timeloop, OverridesAreApplied) {
  Simulation sim(model_a());
  const auto space = sim.space_ptr();
  sim.set_concentrations({DgField(space, 10.0), DgField(space, 20.0)});
  for (double v : sim.state().conc[2].values()) EXPECT_NEAR(v, 30.0, 1e-12);
  EXPECT_THROW(sim.set_concentrations({DgField(space, 1.0)}), ConfigError);
  EXPECT_THROW(sim.set_membrane_potential({1.0, 2.0}), ConfigError);
  sim.set_membrane_potential(std::vector<double>(sim.membrane().size(), -0.05));
  EXPECT_EQ(sim.state().membrane.phi_M[0], -0.05);
}

TEST(Timeloop, KeepsMatricesOnRequest) {
  Simulation sim(model_a());
  sim.keep_matrices(true);
  sim.step();
  EXPECT_EQ(sim.last_matrices().emi.rows(), sim.space().size());
  ASSERT_EQ(sim.last_matrices().knp.size(), 2u);
  EXPECT_EQ(sim.last_matrices().knp[0].first, "Na");
}

TEST(Timeloop, TinyPenaltyIsRejected) {
  SimulationConfig c = model_a();
  c.beta = 1e-3;
  Simulation sim(c);
  // caught either by the step-0 positivity check or by the AMG setup; never a silent result
  EXPECT_THROW(sim.step(), Error);
}

class Peclet : public ::testing::Test {
 protected:
  std::shared_ptr<const DgSpace> space_ = testing::make_space(testing::unit_square(4), 1);
  IonSpecies na_ = default_species()[0];
  PhysicalConstants consts_;
};

TEST_F(Peclet, DiffusionOnly) {
  const DgField c = interpolate(space_, [](Point2 x, int) { return 1.0 + x.x + 2.0 * x.y; });
  const DgField pe = peclet_ratio(c, DgField(space_, 0.2), na_, consts_, 1e-12);
  for (double v : pe.values()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST_F(Peclet, DriftOnly) {
  const double eps = 1e-12;
  const DgField phi = interpolate(space_, [](Point2 x, int) { return 0.01 * x.x; });
  const DgField pe = peclet_ratio(DgField(space_, 2.0), phi, na_, consts_, eps);
  const double expected = -std::abs(na_.valence * 2.0 * consts_.psi() * na_.diffusivity * 0.01) / eps;
  for (double v : pe.values()) EXPECT_NEAR(v, expected, 1e-9 * std::abs(expected));
}

TEST_F(Peclet, ConstantFields) {
  const DgField pe = peclet_ratio(DgField(space_, 3.0), DgField(space_, 0.1), na_, consts_, 1e-12);
  for (double v : pe.values()) EXPECT_EQ(v, 0.0);
}

}  // namespace
}  // namespace knpemi
