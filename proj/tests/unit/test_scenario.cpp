#include <gtest/gtest.h>

#include <string>

#include "knpemi/scenario.hpp"

namespace knpemi {
namespace {

// Error message of parse_config, empty when it succeeds.
std::string parse_error(const std::string& text) {
  try {
    parse_config(text, "case.ini");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

TEST(Scenario, EmptyTextKeepsTheBase) {
  EXPECT_EQ(parse_config(""), preset("model-a"));
  EXPECT_EQ(parse_config("# only a comment\n\n", "x", preset("model-b")), preset("model-b"));
}

TEST(Scenario, PresetsAreValid) {
  for (const std::string& name : preset_names()) EXPECT_NO_THROW(validate(preset(name))) << name;
  EXPECT_THROW(preset("model-z"), ConfigError);
}

TEST(Scenario, ModelBGeometryAndStimulus) {
  const ScenarioConfig b = preset("model-b");
  EXPECT_DOUBLE_EQ(b.sim.geometry.box.x1, 62e-6);
  EXPECT_DOUBLE_EQ(b.sim.geometry.box.y1, 4e-6);
  ASSERT_EQ(b.sim.geometry.ics.size(), 1u);
  EXPECT_DOUBLE_EQ(b.sim.geometry.ics[0].x0, 1e-6);
  EXPECT_DOUBLE_EQ(b.sim.geometry.ics[0].x1, 61e-6);
  EXPECT_EQ(b.sim.geometry.nx, 124);
  EXPECT_EQ(b.sim.geometry.ny, 16);
  EXPECT_EQ(b.sim.membrane.model, MembraneModel::HodgkinHuxley);
  EXPECT_TRUE(b.sim.membrane.stimulus.enabled);
  EXPECT_DOUBLE_EQ(b.sim.membrane.stimulus.g_syn, 40.0);
  EXPECT_DOUBLE_EQ(b.sim.membrane.stimulus.period, 0.02);
  EXPECT_DOUBLE_EQ(b.sim.t_end, 0.1);
}

TEST(Scenario, NegativeStepIsRejectedWithLineContext) {
  const std::string err = parse_error("[time]\n\ndt = -1\n");
  ASSERT_FALSE(err.empty());
  EXPECT_NE(err.find("case.ini:3"), std::string::npos) << err;
  EXPECT_NE(err.find("dt"), std::string::npos) << err;
}

TEST(Scenario, StructuralErrorsCarryLineNumbers) {
  const struct {
    std::string text, needle;
  } cases[] = {
      {"[time]\nbogus = 1\n", "case.ini:2"},
      {"[nowhere]\n", "case.ini:1"},
      {"[time]\ndt = 1 ms\ndt = 2 ms\n", "duplicate"},
      {"[time]\ndt =\n", "missing value"},
      {"dt = 1\n", "outside"},
      {"[time\n", "unterminated"},
      {"[time]\ndt 1\n", "key = value"},
      {"[time]\ndt = 1 V\n", "unit"},
      {"[discretization]\ndegree = 3\n", "degree"},
      {"[solver]\namg_smoother = sor\n", "jacobi"},
      {"[species.Na]\nvalence = 0\n", "valence"},
  };
  for (const auto& c : cases) {
    const std::string err = parse_error(c.text);
    EXPECT_NE(err.find(c.needle), std::string::npos) << c.text << " -> " << err;
  }
}

TEST(Scenario, UnitsConvertToSi) {
  const ScenarioConfig c = parse_config(
      "[time]\ndt = 0.1 ms\nt_end = 2 ms\n"
      "[geometry]\nbox = 0 62 0 4 um\nics = 1 61 1 3 um\nnx = 124\nny = 16\n"
      "[membrane]\nphi_M0 = -70 mV\ng_Na = 120 mS/cm2\n[output]\nprobe = 25 1 um\n");
  EXPECT_DOUBLE_EQ(c.sim.dt, 1e-4);
  EXPECT_DOUBLE_EQ(c.sim.t_end, 2e-3);
  EXPECT_DOUBLE_EQ(c.sim.geometry.box.x1, 62e-6);
  ASSERT_EQ(c.sim.geometry.ics.size(), 1u);
  EXPECT_DOUBLE_EQ(c.sim.geometry.ics[0].y1, 3e-6);
  EXPECT_DOUBLE_EQ(c.sim.phi_M0, -0.07);
  EXPECT_DOUBLE_EQ(c.sim.membrane.hh.g_Na, 1200.0);
  ASSERT_EQ(c.probes.size(), 1u);
  EXPECT_DOUBLE_EQ(c.probes[0].x, 25e-6);
  EXPECT_DOUBLE_EQ(parse_quantity("2", "uF/cm2", "capacitance"), 0.02);
  EXPECT_DOUBLE_EQ(parse_quantity("3", "", "length"), 3.0);
  EXPECT_THROW(parse_quantity("abc", "", "length"), ConfigError);
  EXPECT_THROW(parse_quantity("1", "kg", "length"), ConfigError);
}

TEST(Scenario, SpeciesSectionsReplaceTheList) {
  const ScenarioConfig c = parse_config(
      "[species.Na]\n[species.K]\ng_leak = 5\n[species.Cl]\neliminated = true\n");
  ASSERT_EQ(c.sim.species.size(), 3u);
  EXPECT_EQ(c.sim.species[1].name, "K");
  EXPECT_DOUBLE_EQ(c.sim.species[1].g_leak, 5.0);
  EXPECT_NE(parse_error("[species.Na]\n[species.Na]\n").find("duplicate species"), std::string::npos);
}

TEST(Scenario, FormatRoundTripsExactly) {
  for (const std::string& name : preset_names()) {
    const ScenarioConfig c = preset(name);
    EXPECT_EQ(parse_config(format_config(c), "round", c), c) << name;
    // also from a different base: the text must be complete
    const ScenarioConfig other = preset(name == "model-a" ? "model-b" : "model-a");
    EXPECT_EQ(parse_config(format_config(c), "round", other), c) << name;
  }
  ScenarioConfig odd = preset("model-a");
  odd.sim.dt = 1.0 / 3.0 * 1e-4;
  odd.sim.dt_ode = odd.sim.dt / 7.0;
  odd.probes = {{0.1, 0.2}, {0.3, 0.4}};
  odd.sim.geometry.ics.push_back({0.8125, 0.9375, 0.0625, 0.1875});
  odd.snapshot_every = 5;
  odd.clamp_limit = 12;
  EXPECT_EQ(parse_config(format_config(odd)), odd);
}

TEST(Scenario, ValidationCatchesOutputSettings) {
  ScenarioConfig c = preset("model-a");
  c.probes = {{2.0, 0.5}};
  EXPECT_THROW(validate(c), ConfigError);
  c = preset("model-a");
  c.snapshot_every = -1;
  EXPECT_THROW(validate(c), ConfigError);
  c = preset("model-a");
  c.threads = 0;
  EXPECT_THROW(validate(c), ConfigError);
}

}  // namespace
}  // namespace knpemi
