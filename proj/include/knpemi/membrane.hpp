#pragma once

#include <array>
#include <span>
#include <vector>

#include "knpemi/dgspace.hpp"
#include "knpemi/physics.hpp"

namespace knpemi {

/// One quadrature point on a membrane facet.
struct MembranePoint {
  Index facet = -1;
  int quad = 0;
  Point2 x;
  double weight = 0.0;
};

/// Membrane quadrature points in facet order, facet_rule() points per facet.
class MembraneGeometry {
 public:
  MembraneGeometry() = default;
  explicit MembraneGeometry(const DgSpace& space);

  std::size_t size() const { return points_.size(); }
  const MembranePoint& operator[](std::size_t i) const { return points_[i]; }
  std::span<const MembranePoint> points() const { return points_; }
  std::span<const Index> facets() const { return facets_; }
  int points_per_facet() const { return per_facet_; }
  /// Index of the point closest to x.
  std::size_t nearest(Point2 x) const;

 private:
  std::vector<MembranePoint> points_;
  std::vector<Index> facets_;
  int per_facet_ = 0;
};

/// Per-point intracellular and extracellular traces of every species.
/// `concs` holds one field per species, including the eliminated one.
std::vector<MembraneTrace> membrane_traces(const MembraneGeometry& geom, const DgSpace& space,
                                           std::span<const DgField> concs);

/// Gate order: n, m, h.
using Gates = std::array<double, 3>;

struct MembraneState {
  std::vector<double> phi_M;   // V
  std::vector<Gates> gates;
  std::vector<Point2> position;

  std::size_t size() const { return phi_M.size(); }
};

enum class MembraneModel { Passive, HodgkinHuxley };

const char* to_string(MembraneModel m);

struct HodgkinHuxleyParams {
  double g_Na = 1200.0;    // S/m^2, peak sodium conductance
  double g_K = 360.0;      // S/m^2, peak potassium conductance
  double v_rest = -0.065;  // V, offset of the rate functions
  friend bool operator==(const HodgkinHuxleyParams&, const HodgkinHuxleyParams&) = default;
};

/// Synaptic input g_syn * mask(x) * exp(-t_loc/tau) * (phi_M - E_Na), added to
/// the sodium current. The clock restarts every `period`.
struct StimulusSpec {
  double g_syn = 40.0;     // S/m^2
  double tau = 0.02;       // s
  double period = 0.02;    // s
  double x_max = 1e-6;     // m, stimulated where x <= x_max
  bool enabled = true;

  double local_time(double t) const;
  bool mask(Point2 x) const { return enabled && x.x <= x_max + 1e-12 * std::max(1.0, std::abs(x_max)); }
  /// Conductance g_syn * mask * exp(-t_loc/tau), S/m^2.
  double conductance(Point2 x, double t) const;
  friend bool operator==(const StimulusSpec&, const StimulusSpec&) = default;
};

struct MembraneParams {
  MembraneModel model = MembraneModel::HodgkinHuxley;
  HodgkinHuxleyParams hh;
  StimulusSpec stimulus;
  friend bool operator==(const MembraneParams&, const MembraneParams&) = default;
};

/// Rate functions in 1/s; V is phi_M in volts.
struct GateRates {
  double alpha_n, beta_n, alpha_m, beta_m, alpha_h, beta_h;
};
GateRates hh_rates(double phi_M, const HodgkinHuxleyParams& p);
Gates hh_steady_state(double phi_M, const HodgkinHuxleyParams& p);

/// Nernst potentials frozen over an ODE sub-step.
struct ReversalPotentials {
  std::vector<double> E;
};
ReversalPotentials reversal_potentials(const MembraneTrace& trace, std::span<const IonSpecies> species,
                                       const PhysicalConstants& consts, ClampCounter& clamps);

/// Channel currents per species, A/m^2. The stimulus (if any) is added to
/// the species named "Na"; HH currents go to "Na" and "K".
std::vector<double> channel_currents(double phi_M, const Gates& gates, const ReversalPotentials& rev,
                                     std::span<const IonSpecies> species, const MembraneParams& params,
                                     double t, Point2 x);

/// Resolved species indices for the HH and stimulus channels.
struct ChannelMap {
  std::size_t sodium = 0;
  std::size_t potassium = 0;
};
ChannelMap channel_map(std::span<const IonSpecies> species, const MembraneParams& params);

struct OdeOptions {
  double max_step = 1e-4;
  double rtol = 1e-6;
  double atol_voltage = 1e-8;
  double atol_gate = 1e-8;
  double min_step = 1e-14;
  friend bool operator==(const OdeOptions&, const OdeOptions&) = default;
};

struct OdeStats {
  long long accepted = 0;
  long long rejected = 0;
};

MembraneState initial_membrane_state(const MembraneGeometry& geom, double phi_M0, const MembraneParams& params);

/// Integrates dphi_M/dt = -I/C_M and the gate equations over [t, t + dt]
/// for every point with an adaptive Dormand-Prince 5(4) pair, steps <= max_step.
/// Concentrations are frozen at the given traces.
MembraneState ode_substep(const MembraneState& state, std::span<const MembraneTrace> traces,
                          std::span<const IonSpecies> species, const PhysicalConstants& consts,
                          const MembraneParams& params, double t, double dt, const OdeOptions& opts,
                          ClampCounter& clamps, OdeStats* stats = nullptr);

/// phi_M at every point = intracellular trace - extracellular trace of phi.
MembraneState update_phi_M_from_fields(MembraneState state, const DgField& phi, const MembraneGeometry& geom);

/// phi_M values from the potential field without a state.
std::vector<double> membrane_jump(const DgField& phi, const MembraneGeometry& geom);

}  // namespace knpemi
