#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "knpemi/membrane.hpp"

namespace knpemi {
namespace {

const PhysicalConstants kConsts{};

MembraneTrace rest_trace() {
  MembraneTrace tr;
  tr.conc[0] = {12.0, 125.0, 137.0};
  tr.conc[1] = {100.0, 4.0, 104.0};
  return tr;
}

MembraneParams passive_params() {
  MembraneParams p;
  p.model = MembraneModel::Passive;
  p.stimulus.enabled = false;
  return p;
}

MembraneParams hh_params() {
  MembraneParams p;
  p.stimulus.enabled = false;
  return p;
}

ReversalPotentials rest_reversal(std::span<const IonSpecies> sp) {
  ClampCounter clamps;
  return reversal_potentials(rest_trace(), sp, kConsts, clamps);
}

TEST(Membrane, LeakCurrentAtRest) {
  const auto sp = default_species();
  const ReversalPotentials rev = rest_reversal(sp);
  const double phi_M = -0.06774;
  const auto cur = channel_currents(phi_M, Gates{}, rev, sp, passive_params(), 0.0, {});
  const double e_k = nernst_potential(4.0, 125.0, 1, kConsts);
  EXPECT_NEAR(cur[1], 4.0 * (phi_M - e_k), 1e-15);
  EXPECT_NEAR(cur[1], 0.0850, 1e-4);
  EXPECT_EQ(cur[2], 0.0);  // no chloride leak by default
}

TEST(Membrane, ReversalPotentialZeroesLeak) {
  const auto sp = default_species();
  const ReversalPotentials rev = rest_reversal(sp);
  const auto cur = channel_currents(rev.E[0], Gates{}, rev, sp, passive_params(), 0.0, {});
  EXPECT_NEAR(cur[0], 0.0, 1e-16);
  auto closed = sp;
  for (auto& s : closed) s.g_leak = 0.0;
  for (double c : channel_currents(0.03, Gates{0.3, 0.2, 0.6}, rev, closed, passive_params(), 0.0, {})) {
    EXPECT_EQ(c, 0.0);
  }
  MembraneParams hh = hh_params();
  hh.hh.g_Na = hh.hh.g_K = 0.0;
  for (double c : channel_currents(0.03, Gates{0.3, 0.2, 0.6}, rev, closed, hh, 0.0, {})) EXPECT_EQ(c, 0.0);
}

TEST(Membrane, GateSteadyStateIsAFixedPoint) {
  const HodgkinHuxleyParams p;
  for (double v : {-0.09, -0.06774, -0.04, 0.0, 0.03}) {
    Gates s = hh_steady_state(v, p);
    const Gates s0 = s;
    // fixed-voltage gate dynamics, classical RK4 over 1 ms
    const GateRates r = hh_rates(v, p);
    const std::array<double, 3> a{r.alpha_n, r.alpha_m, r.alpha_h}, b{r.beta_n, r.beta_m, r.beta_h};
    const double h = 1e-6;
    for (int n = 0; n < 1000; ++n) {
      for (int g = 0; g < 3; ++g) {
        auto f = [&](double y) { return a[g] * (1.0 - y) - b[g] * y; };
        const double k1 = f(s[g]), k2 = f(s[g] + 0.5 * h * k1), k3 = f(s[g] + 0.5 * h * k2), k4 = f(s[g] + h * k3);
        s[g] += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      }
    }
    for (int g = 0; g < 3; ++g) {
      EXPECT_NEAR(s[g], s0[g], 1e-6) << "gate " << g << " at " << v;
      EXPECT_NEAR(s0[g], a[g] / (a[g] + b[g]), 1e-15);
    }
  }
}

TEST(Membrane, RatesAreFiniteAtRemovableSingularities) {
  const HodgkinHuxleyParams p;
  // the n and m rates have 0/0 forms 10 mV and 25 mV above the offset
  for (double v : {p.v_rest + 0.010, p.v_rest + 0.025}) {
    const GateRates r = hh_rates(v, p);
    EXPECT_TRUE(std::isfinite(r.alpha_n) && r.alpha_n > 0.0);
    EXPECT_TRUE(std::isfinite(r.alpha_m) && r.alpha_m > 0.0);
    const GateRates lo = hh_rates(v - 1e-7, p), hi = hh_rates(v + 1e-7, p);
    EXPECT_NEAR(r.alpha_n, 0.5 * (lo.alpha_n + hi.alpha_n), 1e-6 * r.alpha_n);
    EXPECT_NEAR(r.alpha_m, 0.5 * (lo.alpha_m + hi.alpha_m), 1e-6 * r.alpha_m);
  }
}

TEST(Membrane, HodgkinHuxleyRestIsNearlyStationary) {
  const auto sp = default_species();
  const ReversalPotentials rev = rest_reversal(sp);
  const MembraneParams p = hh_params();
  const double phi_M = -0.06774;
  const auto cur = channel_currents(phi_M, hh_steady_state(phi_M, p.hh), rev, sp, p, 0.0, {});
  const double dphidt = -(cur[0] + cur[1] + cur[2]) / kConsts.capacitance;
  EXPECT_LT(std::abs(dphidt), 1.0);
}

TEST(Membrane, PassiveRestDriftMatchesLeakImbalance) {
  const auto sp = default_species();
  const ReversalPotentials rev = rest_reversal(sp);
  const double phi_M = -0.06774;
  const auto cur = channel_currents(phi_M, Gates{}, rev, sp, passive_params(), 0.0, {});
  const double dphidt = -(cur[0] + cur[1] + cur[2]) / kConsts.capacitance;
  const double oracle =
      -(1.0 * (phi_M - nernst_potential(100, 12, 1, kConsts)) + 4.0 * (phi_M - nernst_potential(4, 125, 1, kConsts))) /
      kConsts.capacitance;
  EXPECT_NEAR(dphidt, oracle, 1e-12);
  EXPECT_NEAR(dphidt, 3.77, 0.02);
}

TEST(Membrane, StimulusClockAndMask) {
  StimulusSpec s;
  EXPECT_NEAR(s.local_time(0.045), 0.005, 1e-15);
  EXPECT_NEAR(s.conductance({0.5e-6, 1e-6}, 0.02), s.g_syn, 1e-12);
  EXPECT_NEAR(s.conductance({0.5e-6, 1e-6}, 0.01), s.g_syn * std::exp(-0.5), 1e-12);
  EXPECT_EQ(s.conductance({2e-6, 1e-6}, 0.0), 0.0);
  s.enabled = false;
  EXPECT_EQ(s.conductance({0.5e-6, 1e-6}, 0.0), 0.0);
}

class OdeFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    space_ = testing::make_space(testing::unit_square(4), 1);
    geom_ = MembraneGeometry(*space_);
    traces_.assign(geom_.size(), rest_trace());
  }
  std::shared_ptr<const DgSpace> space_;
  MembraneGeometry geom_;
  std::vector<MembraneTrace> traces_;
};

TEST_F(OdeFixture, GeometryCoversMembraneFacets) {
  EXPECT_EQ(geom_.size(), geom_.facets().size() * static_cast<std::size_t>(geom_.points_per_facet()));
  double len = 0.0;
  for (const MembranePoint& p : geom_.points()) len += p.weight;
  EXPECT_NEAR(len, 2.0, 1e-14);
  EXPECT_EQ(geom_.nearest(geom_[5].x), 5u);
}

TEST_F(OdeFixture, NoCurrentsLeaveStateUnchanged) {
  auto sp = default_species();
  for (auto& s : sp) s.g_leak = 0.0;
  const MembraneParams p = passive_params();
  const MembraneState s0 = initial_membrane_state(geom_, -0.05, p);
  ClampCounter clamps;
  const MembraneState s1 = ode_substep(s0, traces_, sp, kConsts, p, 0.0, 1e-3, OdeOptions{}, clamps);
  for (std::size_t i = 0; i < s0.size(); ++i) EXPECT_EQ(s1.phi_M[i], s0.phi_M[i]);
}

TEST_F(OdeFixture, PureLeakRelaxesMonotonicallyToWeightedReversal) {
  const auto sp = default_species();
  const MembraneParams p = passive_params();
  const ReversalPotentials rev = rest_reversal(sp);
  const double target = (1.0 * rev.E[0] + 4.0 * rev.E[1]) / 5.0;
  MembraneState s = initial_membrane_state(geom_, 0.0, p);
  ClampCounter clamps;
  double prev = s.phi_M[0];
  const double tau = kConsts.capacitance / 5.0;
  for (int n = 0; n < 20; ++n) {
    s = ode_substep(s, traces_, sp, kConsts, p, n * 1e-4, 1e-4, OdeOptions{}, clamps);
    EXPECT_LT(s.phi_M[0], prev);
    EXPECT_GT(s.phi_M[0], target);
    prev = s.phi_M[0];
    // scalar linear ODE: closed form
    const double exact = target + (0.0 - target) * std::exp(-(n + 1) * 1e-4 / tau);
    EXPECT_NEAR(s.phi_M[0], exact, 1e-7);
  }
}

TEST_F(OdeFixture, GatesStayInUnitIntervalForRandomStarts) {
  const auto sp = default_species();
  MembraneParams p = hh_params();
  p.stimulus.enabled = true;
  p.stimulus.x_max = 0.5;
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> v(-0.1, 0.06), g(0.0, 1.0);
  MembraneState s = initial_membrane_state(geom_, -0.06774, p);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s.phi_M[i] = v(rng);
    s.gates[i] = {g(rng), g(rng), g(rng)};
  }
  ClampCounter clamps;
  for (int n = 0; n < 30; ++n) {
    s = ode_substep(s, traces_, sp, kConsts, p, n * 1e-4, 1e-4, OdeOptions{}, clamps);
    for (const Gates& gs : s.gates) {
      for (double x : gs) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
      }
    }
    for (double phi : s.phi_M) EXPECT_TRUE(std::isfinite(phi));
  }
}

TEST_F(OdeFixture, HalvingMaxStepChangesLittle) {
  const auto sp = default_species();
  MembraneParams p = hh_params();
  p.stimulus.enabled = true;
  p.stimulus.x_max = 0.5;
  const MembraneState s0 = initial_membrane_state(geom_, -0.06774, p);
  ClampCounter clamps;
  OdeOptions coarse;
  OdeOptions fine;
  fine.max_step = coarse.max_step / 2;
  MembraneState a = s0, b = s0;
  for (int n = 0; n < 20; ++n) {
    a = ode_substep(a, traces_, sp, kConsts, p, n * 1e-4, 1e-4, coarse, clamps);
    b = ode_substep(b, traces_, sp, kConsts, p, n * 1e-4, 1e-4, fine, clamps);
  }
  double range = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    range = std::max(range, std::abs(a.phi_M[i] - s0.phi_M[i]));
    diff = std::max(diff, std::abs(a.phi_M[i] - b.phi_M[i]));
  }
  EXPECT_GT(range, 1e-3);  // the stimulated points moved
  EXPECT_LT(diff, 1e-3 * range);
}

TEST_F(OdeFixture, InitialStateUsesSteadyStateGates) {
  const MembraneParams p = hh_params();
  const MembraneState s = initial_membrane_state(geom_, -0.06774, p);
  ASSERT_EQ(s.size(), geom_.size());
  const Gates ref = hh_steady_state(-0.06774, p.hh);
  for (const Gates& g : s.gates) EXPECT_EQ(g, ref);
}

TEST_F(OdeFixture, MembraneJumpFromFields) {
  const DgField c(space_, 2.5);
  for (double j : membrane_jump(c, geom_)) EXPECT_NEAR(j, 0.0, 1e-15);
  const DgField ind = interpolate(space_, [](Point2, int t) { return t == kEcsTag ? 0.0 : 1.0; });
  for (double j : membrane_jump(ind, geom_)) EXPECT_NEAR(j, 1.0, 1e-15);
  const DgField x = interpolate(space_, [](Point2 p, int) { return p.x; });
  for (double j : membrane_jump(x, geom_)) EXPECT_NEAR(j, 0.0, 1e-15);
  const MembraneState s = update_phi_M_from_fields(initial_membrane_state(geom_, -0.07, hh_params()), ind, geom_);
  for (double phi : s.phi_M) EXPECT_NEAR(phi, 1.0, 1e-15);
}

TEST_F(OdeFixture, TracesSeeBothSides) {
  std::vector<DgField> concs;
  for (double v : {1.0, 2.0, 3.0}) {
    concs.push_back(interpolate(space_, [v](Point2, int t) { return t == kEcsTag ? 10.0 * v : v; }));
  }
  const auto tr = membrane_traces(geom_, *space_, concs);
  ASSERT_EQ(tr.size(), geom_.size());
  for (const MembraneTrace& t : tr) {
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_NEAR(t.conc[0][k], k + 1.0, 1e-14);
      EXPECT_NEAR(t.conc[1][k], 10.0 * (k + 1.0), 1e-13);
    }
  }
}

}  // namespace
}  // namespace knpemi
