#include "knpemi/membrane.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace knpemi {

MembraneGeometry::MembraneGeometry(const DgSpace& space) {
  const Mesh2D& mesh = space.mesh();
  per_facet_ = static_cast<int>(space.facet_rule().size());
  FacetQuadrature fq;
  for (Index f = 0; f < mesh.num_facets(); ++f) {
    if (mesh.facet(f).cls != FacetClass::Membrane) continue;
    facets_.push_back(f);
    space.facet_quadrature(f, fq);
    for (int q = 0; q < fq.num_points; ++q) points_.push_back({f, q, fq.point[q].x, fq.point[q].weight});
  }
}

std::size_t MembraneGeometry::nearest(Point2 x) const {
  if (points_.empty()) throw DomainError("membrane has no quadrature points");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double d = norm(points_[i].x - x);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::vector<MembraneTrace> membrane_traces(const MembraneGeometry& geom, const DgSpace& space,
                                           std::span<const DgField> concs) {
  std::vector<MembraneTrace> out(geom.size());
  FacetQuadrature fq;
  const int n = space.local_size();
  std::size_t idx = 0;
  for (Index f : geom.facets()) {
    space.facet_quadrature(f, fq);
    for (int q = 0; q < fq.num_points; ++q, ++idx) {
      MembraneTrace& tr = out[idx];
      for (int side = 0; side < 2; ++side) {
        tr.conc[side].resize(concs.size());
        for (std::size_t k = 0; k < concs.size(); ++k) {
          const std::vector<double>& c = concs[k].data();
          double v = 0.0;
          for (int i = 0; i < n; ++i) v += fq.point[q].side[side].value[i] * c[space.dof(fq.cell[side], i)];
          tr.conc[side][k] = v;
        }
      }
    }
  }
  return out;
}

const char* to_string(MembraneModel m) {
  return m == MembraneModel::Passive ? "passive" : "hodgkin-huxley";
}

double StimulusSpec::local_time(double t) const {
  if (!(period > 0.0)) return t;
  return t - std::floor(t / period + 1e-9) * period;
}

double StimulusSpec::conductance(Point2 x, double t) const {
  if (!mask(x)) return 0.0;
  return g_syn * std::exp(-local_time(t) / tau);
}

namespace {

/// x / (exp(x) - 1), continuous at 0.
double vtrap(double x) { return std::abs(x) < 1e-9 ? 1.0 - 0.5 * x : x / std::expm1(x); }

}  // namespace

GateRates hh_rates(double phi_M, const HodgkinHuxleyParams& p) {
  const double v = (phi_M - p.v_rest) * 1e3;  // mV above rest
  GateRates r{};
  r.alpha_n = 1e3 * 0.1 * vtrap((10.0 - v) / 10.0);
  r.beta_n = 1e3 * 0.125 * std::exp(-v / 80.0);
  r.alpha_m = 1e3 * 1.0 * vtrap((25.0 - v) / 10.0);
  r.beta_m = 1e3 * 4.0 * std::exp(-v / 18.0);
  r.alpha_h = 1e3 * 0.07 * std::exp(-v / 20.0);
  r.beta_h = 1e3 / (std::exp((30.0 - v) / 10.0) + 1.0);
  return r;
}

Gates hh_steady_state(double phi_M, const HodgkinHuxleyParams& p) {
  const GateRates r = hh_rates(phi_M, p);
  return {r.alpha_n / (r.alpha_n + r.beta_n), r.alpha_m / (r.alpha_m + r.beta_m),
          r.alpha_h / (r.alpha_h + r.beta_h)};
}

ReversalPotentials reversal_potentials(const MembraneTrace& trace, std::span<const IonSpecies> species,
                                       const PhysicalConstants& consts, ClampCounter& clamps) {
  ReversalPotentials rev;
  rev.E.resize(species.size());
  for (std::size_t k = 0; k < species.size(); ++k) {
    rev.E[k] = nernst_clamped(trace.conc[1][k], trace.conc[0][k], species[k].valence, consts, clamps);
  }
  return rev;
}

ChannelMap channel_map(std::span<const IonSpecies> species, const MembraneParams& params) {
  ChannelMap map;
  const bool need_na = params.model == MembraneModel::HodgkinHuxley || params.stimulus.enabled;
  if (need_na) map.sodium = species_index(species, "Na");
  if (params.model == MembraneModel::HodgkinHuxley) map.potassium = species_index(species, "K");
  return map;
}

namespace {

void currents_into(double phi, const Gates& s, const ReversalPotentials& rev, std::span<const IonSpecies> species,
                   const MembraneParams& params, const ChannelMap& map, double t, Point2 x,
                   std::span<double> out) {
  for (std::size_t k = 0; k < species.size(); ++k) out[k] = species[k].g_leak * (phi - rev.E[k]);
  if (params.model == MembraneModel::HodgkinHuxley) {
    const double m3h = s[1] * s[1] * s[1] * s[2];
    const double n4 = s[0] * s[0] * s[0] * s[0];
    out[map.sodium] += params.hh.g_Na * m3h * (phi - rev.E[map.sodium]);
    out[map.potassium] += params.hh.g_K * n4 * (phi - rev.E[map.potassium]);
  }
  if (params.stimulus.enabled) {
    out[map.sodium] += params.stimulus.conductance(x, t) * (phi - rev.E[map.sodium]);
  }
}

using OdeState = std::array<double, 4>;

struct OdeRhs {
  const ReversalPotentials& rev;
  std::span<const IonSpecies> species;
  const MembraneParams& params;
  const ChannelMap& map;
  double capacitance;
  Point2 x;
  mutable std::array<double, 8> buffer{};
  mutable std::vector<double> heap;

  OdeState operator()(double t, const OdeState& y) const {
    std::span<double> cur;
    if (species.size() <= buffer.size()) {
      cur = std::span<double>(buffer).first(species.size());
    } else {
      heap.resize(species.size());
      cur = heap;
    }
    const Gates s{y[1], y[2], y[3]};
    currents_into(y[0], s, rev, species, params, map, t, x, cur);
    double total = 0.0;
    for (double c : cur) total += c;
    OdeState d{-total / capacitance, 0.0, 0.0, 0.0};
    if (params.model == MembraneModel::HodgkinHuxley) {
      const GateRates r = hh_rates(y[0], params.hh);
      d[1] = r.alpha_n * (1.0 - y[1]) - r.beta_n * y[1];
      d[2] = r.alpha_m * (1.0 - y[2]) - r.beta_m * y[2];
      d[3] = r.alpha_h * (1.0 - y[3]) - r.beta_h * y[3];
    }
    return d;
  }
};

OdeState axpy(const OdeState& y, double h, std::initializer_list<std::pair<double, const OdeState*>> terms) {
  OdeState out = y;
  for (const auto& [c, k] : terms) {
    if (c == 0.0) continue;
    for (int i = 0; i < 4; ++i) out[i] += h * c * (*k)[i];
  }
  return out;
}

}  // namespace

std::vector<double> channel_currents(double phi_M, const Gates& gates, const ReversalPotentials& rev,
                                     std::span<const IonSpecies> species, const MembraneParams& params,
                                     double t, Point2 x) {
  std::vector<double> out(species.size());
  currents_into(phi_M, gates, rev, species, params, channel_map(species, params), t, x, out);
  return out;
}

MembraneState initial_membrane_state(const MembraneGeometry& geom, double phi_M0, const MembraneParams& params) {
  MembraneState s;
  s.phi_M.assign(geom.size(), phi_M0);
  s.gates.assign(geom.size(), hh_steady_state(phi_M0, params.hh));
  s.position.resize(geom.size());
  for (std::size_t i = 0; i < geom.size(); ++i) s.position[i] = geom[i].x;
  return s;
}

MembraneState ode_substep(const MembraneState& state, std::span<const MembraneTrace> traces,
                          std::span<const IonSpecies> species, const PhysicalConstants& consts,
                          const MembraneParams& params, double t, double dt, const OdeOptions& opts,
                          ClampCounter& clamps, OdeStats* stats) {
  if (!(opts.max_step > 0.0) || opts.max_step > dt * (1.0 + 1e-12)) {
    throw ConfigError("ODE: maximum step must be positive and not exceed the PDE step");
  }
  if (traces.size() != state.size()) throw ConfigError("ODE: one trace per membrane point required");
  const ChannelMap map = channel_map(species, params);
  const bool gated = params.model == MembraneModel::HodgkinHuxley;
  MembraneState out = state;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                          a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                          a65 = -5103.0 / 18656.0;
  static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                          b6 = 11.0 / 84.0;
  static constexpr double e1 = b1 - 5179.0 / 57600.0, e3 = b3 - 7571.0 / 16695.0, e4 = b4 - 393.0 / 640.0,
                          e5 = b5 - (-92097.0 / 339200.0), e6 = b6 - 187.0 / 2100.0, e7 = -1.0 / 40.0;

  OdeStats local;
  for (std::size_t p = 0; p < state.size(); ++p) {
    const ReversalPotentials rev = reversal_potentials(traces[p], species, consts, clamps);
    const OdeRhs f{rev, species, params, map, consts.capacitance, state.position[p], {}, {}};
    OdeState y{state.phi_M[p], state.gates[p][0], state.gates[p][1], state.gates[p][2]};
    double time = t;
    const double t_end = t + dt;
    double h = std::min(opts.max_step, dt);
    OdeState k1 = f(time, y);
    while (time < t_end - 1e-15 * std::max(1.0, std::abs(t_end))) {
      h = std::min({h, opts.max_step, t_end - time});
      if (h < opts.min_step) {
        std::ostringstream msg;
        msg << "ODE step size underflow at membrane point (" << state.position[p].x << ", " << state.position[p].y
            << ") m, t = " << time << " s";
        throw NumericalError(msg.str());
      }
      const OdeState k2 = f(time + h / 5.0, axpy(y, h, {{a21, &k1}}));
      const OdeState k3 = f(time + 3.0 * h / 10.0, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
      const OdeState k4 = f(time + 4.0 * h / 5.0, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
      const OdeState k5 = f(time + 8.0 * h / 9.0, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
      const OdeState k6 = f(time + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
      const OdeState ynew = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
      const OdeState k7 = f(time + h, ynew);
      double err2 = 0.0;
      const int ncomp = gated ? 4 : 1;
      for (int i = 0; i < ncomp; ++i) {
        const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double atol = i == 0 ? opts.atol_voltage : opts.atol_gate;
        const double sc = atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        err2 += (e / sc) * (e / sc);
      }
      const double err = std::sqrt(err2 / ncomp);
      if (std::isfinite(err) && err <= 1.0) {
        time += h;
        y = ynew;
        k1 = k7;
        ++local.accepted;
        const double grow = err == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(err, -0.2));
        h *= grow;
      } else {
        ++local.rejected;
        const double shrink = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
        h *= shrink;
      }
    }
    if (!std::isfinite(y[0])) throw NumericalError("ODE produced a non-finite membrane potential");
    out.phi_M[p] = y[0];
    out.gates[p] = {y[1], y[2], y[3]};
  }
  if (stats) {
    stats->accepted += local.accepted;
    stats->rejected += local.rejected;
  }
  return out;
}

std::vector<double> membrane_jump(const DgField& phi, const MembraneGeometry& geom) {
  const DgSpace& space = phi.space();
  std::vector<double> out(geom.size());
  FacetQuadrature fq;
  std::size_t idx = 0;
  for (Index f : geom.facets()) {
    space.facet_quadrature(f, fq);
    for (int q = 0; q < fq.num_points; ++q, ++idx) {
      double jump = 0.0;
      for (int i = 0; i < space.local_size(); ++i) {
        jump += fq.point[q].side[0].value[i] * phi.data()[space.dof(fq.cell[0], i)] -
                fq.point[q].side[1].value[i] * phi.data()[space.dof(fq.cell[1], i)];
      }
      out[idx] = jump;
    }
  }
  return out;
}

MembraneState update_phi_M_from_fields(MembraneState state, const DgField& phi, const MembraneGeometry& geom) {
  state.phi_M = membrane_jump(phi, geom);
  return state;
}

}  // namespace knpemi
