#include "knpemi/timeloop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace knpemi {

void validate(const SimulationConfig& cfg) {
  validate(cfg.geometry);
  validate_species(cfg.species);
  if (cfg.degree != 1 && cfg.degree != 2) throw ConfigError("polynomial degree must be 1 or 2");
  if (!(cfg.dt > 0.0)) throw ConfigError("time step must be positive");
  if (!(cfg.dt_ode > 0.0) || cfg.dt_ode > cfg.dt * (1.0 + 1e-12)) {
    throw ConfigError("ODE step must be positive and not exceed the PDE step");
  }
  if (!(cfg.t_end >= 0.0)) throw ConfigError("end time must be nonnegative");
  if (!(cfg.consts.capacitance > 0.0) || !(cfg.consts.temperature > 0.0)) {
    throw ConfigError("capacitance and temperature must be positive");
  }
  if (cfg.solver.cg.rtol <= 0.0 || cfg.solver.gmres.rtol <= 0.0) throw ConfigError("solver tolerances must be positive");
  if (cfg.solver.cg.max_iterations <= 0 || cfg.solver.gmres.max_iterations <= 0 || cfg.solver.gmres.restart <= 0) {
    throw ConfigError("solver iteration limits must be positive");
  }
  if (cfg.membrane.stimulus.enabled && !(cfg.membrane.stimulus.tau > 0.0)) {
    throw ConfigError("stimulus decay time must be positive");
  }
  for (const IonSpecies& s : cfg.species) {
    if (!(s.c_ics > 0.0) || !(s.c_ecs > 0.0)) throw ConfigError("initial concentrations must be positive: " + s.name);
    if (s.g_leak < 0.0) throw ConfigError("leak conductance must be nonnegative: " + s.name);
  }
  channel_map(cfg.species, cfg.membrane);  // throws if a required channel species is missing
}

namespace {

PointFunction by_compartment(double ics, double ecs) {
  return [ics, ecs](Point2, int tag) { return tag == kEcsTag ? ecs : ics; };
}

SolveReport require(SolveReport rep, const char* what, long step, double t) {
  if (!rep.converged) {
    std::ostringstream msg;
    msg << what << " solver did not converge at step " << step << " (t = " << t << " s): " << rep.iterations
        << " iterations, relative residual " << rep.residual;
    throw NumericalError(msg.str());
  }
  return rep;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Simulation::Simulation(SimulationConfig cfg, ExternalForcing forcing)
    : cfg_(std::move(cfg)), forcing_(std::move(forcing)) {
  validate(cfg_);
  mesh_ = std::make_shared<const Mesh2D>(build_structured_mesh(cfg_.geometry));
  space_ = std::make_shared<const DgSpace>(mesh_, cfg_.degree);
  pattern_ = std::make_unique<DgPattern>(*space_);
  membrane_ = MembraneGeometry(*space_);
  mass_ = assemble_mass(*space_, *pattern_);
  eliminated_ = eliminated_index(cfg_.species);
  for (std::size_t k = 0; k < cfg_.species.size(); ++k) {
    if (k != eliminated_) solved_.push_back(k);
  }
  diameter_ = std::hypot(cfg_.geometry.box.width(), cfg_.geometry.box.height());

  state_.conc.reserve(cfg_.species.size());
  for (const IonSpecies& s : cfg_.species) state_.conc.push_back(interpolate(space_, by_compartment(s.c_ics, s.c_ecs)));
  state_.phi = interpolate(space_, by_compartment(cfg_.phi_M0, 0.0));
  state_.membrane = initial_membrane_state(membrane_, cfg_.phi_M0, cfg_.membrane);
  frozen_knp_.resize(solved_.size());
}

void Simulation::set_concentrations(std::vector<DgField> solved) {
  if (solved.size() != solved_.size()) throw ConfigError("set_concentrations: one field per solved species required");
  for (std::size_t i = 0; i < solved.size(); ++i) {
    if (solved[i].size() != space_->size()) throw ConfigError("set_concentrations: field size mismatch");
    state_.conc[solved_[i]] = std::move(solved[i]);
  }
  state_.conc[eliminated_] = recover_eliminated(solved_fields(state_, solved_), cfg_.species);
}

void Simulation::set_potential(DgField phi) {
  if (phi.size() != space_->size()) throw ConfigError("set_potential: field size mismatch");
  state_.phi = std::move(phi);
}

void Simulation::set_membrane_potential(std::vector<double> phi_M) {
  if (phi_M.size() != membrane_.size()) throw ConfigError("set_membrane_potential: one value per membrane point");
  state_.membrane.phi_M = std::move(phi_M);
}

InterfaceData Simulation::membrane_interface(double t_new, StepReport& rep) {
  const std::vector<MembraneTrace> traces = membrane_traces(membrane_, *space_, state_.conc);
  ClampCounter clamps;
  InterfaceData data;
  data.points.resize(membrane_.size());
  const double dt = cfg_.dt;
  if (cfg_.membrane.model == MembraneModel::HodgkinHuxley) {
    state_.membrane = ode_substep(state_.membrane, traces, cfg_.species, cfg_.consts, cfg_.membrane, state_.t, dt,
                                  OdeOptions{cfg_.dt_ode, cfg_.ode.rtol, cfg_.ode.atol_voltage, cfg_.ode.atol_gate,
                                             cfg_.ode.min_step},
                                  clamps, &rep.ode);
    for (std::size_t p = 0; p < membrane_.size(); ++p) {
      const ReversalPotentials rev = reversal_potentials(traces[p], cfg_.species, cfg_.consts, clamps);
      const std::vector<double> cur = channel_currents(state_.membrane.phi_M[p], state_.membrane.gates[p], rev,
                                                       cfg_.species, cfg_.membrane, t_new, membrane_[p].x);
      data.points[p] = interface_data_active(state_.membrane.phi_M[p], cur, traces[p], cfg_.consts, dt, cfg_.species,
                                             clamps);
    }
  } else {
    for (std::size_t p = 0; p < membrane_.size(); ++p) {
      const ReversalPotentials rev = reversal_potentials(traces[p], cfg_.species, cfg_.consts, clamps);
      const std::vector<double> cur = channel_currents(state_.membrane.phi_M[p], state_.membrane.gates[p], rev,
                                                       cfg_.species, cfg_.membrane, state_.t, membrane_[p].x);
      data.points[p] = interface_data_passive(state_.membrane.phi_M[p], cur, traces[p], cfg_.consts, dt, cfg_.species,
                                              clamps);
    }
  }
  rep.clamps += clamps.count;
  return data;
}

StepReport Simulation::step() {
  StepReport rep;
  rep.step = state_.step + 1;
  const double t_new = static_cast<double>(rep.step) * cfg_.dt;
  rep.t = t_new;

  const InterfaceData iface = forcing_.interface ? forcing_.interface(state_, t_new) : membrane_interface(t_new, rep);
  if (iface.points.size() != membrane_.size()) throw ConfigError("interface data: one entry per membrane point");

  // Step I: potential.
  EmiInputs emi_in;
  emi_in.space = space_.get();
  emi_in.pattern = pattern_.get();
  emi_in.concs = state_.conc;
  emi_in.species = cfg_.species;
  emi_in.consts = cfg_.consts;
  emi_in.membrane = &membrane_;
  emi_in.interface = &iface;
  emi_in.penalty = cfg_.penalty_beta();
  if (forcing_.potential_source) {
    emi_in.volume_source = [&](Point2 x, int tag) { return forcing_.potential_source(x, tag, t_new); };
  }
  if (forcing_.potential_boundary) {
    emi_in.exterior_current = [&](Point2 x, Point2 n, int tag) { return forcing_.potential_boundary(x, n, tag, t_new); };
  }
  EmiSystem emi = assemble_emi(emi_in);
  rep.emi_asymmetry = emi.system.matrix.asymmetry();
  if (state_.step == 0) {
    // Post-hoc positivity check of the penalty. A nonpositive diagonal entry is
    // an exact certificate of indefiniteness; random probes only catch gross failures.
    const auto diag = emi.system.matrix.diagonal_values();
    const auto worst = std::min_element(diag.begin(), diag.end());
    if (worst != diag.end() && !(*worst > 0.0)) {
      throw ConfigError("potential matrix has a nonpositive diagonal entry at row " +
                        std::to_string(worst - diag.begin()) + "; increase the penalty beta");
    }
    const double rq = rayleigh_probe(emi.system.matrix, 8, *emi.system.nullspace);
    if (!(rq > 0.0)) {
      throw ConfigError("potential matrix is not positive on the mean-free subspace (Rayleigh probe " +
                        std::to_string(rq) + "); increase the penalty beta");
    }
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    const AmgHierarchy* pc = frozen_emi_.get();
    std::unique_ptr<AmgHierarchy> fresh;
    if (!pc) {
      double alpha = cfg_.solver.emi_shift;
      if (!(alpha > 0.0)) {
        alpha = mean_conductivity(*space_, state_.conc, cfg_.species, cfg_.consts) / (diameter_ * diameter_);
      }
      fresh = shifted_emi_preconditioner(emi.system.matrix, mass_, alpha, cfg_.solver.amg);
      pc = fresh.get();
    }
    DgField phi = state_.phi;
    rep.emi = require(cg_nullspace(emi.system, *pc, phi.values(), cfg_.solver.cg), "potential", rep.step, t_new);
    rep.emi.seconds = seconds_since(t0);
    state_.phi = std::move(phi);
    if (cfg_.solver.freeze_hierarchy && fresh) frozen_emi_ = std::move(fresh);
  }

  // Step II: transport of each solved species with the new potential.
  const DriftField drift = drift_field(state_.phi);
  std::vector<DgField> next;
  next.reserve(solved_.size());
  if (keep_matrices_) {
    last_matrices_.emi = emi.system.matrix;
    last_matrices_.knp.clear();
  }
  for (std::size_t i = 0; i < solved_.size(); ++i) {
    const std::size_t k = solved_[i];
    KnpInputs in;
    in.space = space_.get();
    in.pattern = pattern_.get();
    in.species_index = k;
    in.species = cfg_.species;
    in.consts = cfg_.consts;
    in.c_prev = &state_.conc[k];
    in.phi = &state_.phi;
    in.drift = &drift;
    in.membrane = &membrane_;
    in.interface = &iface;
    in.penalty = cfg_.penalty_gamma();
    in.dt = cfg_.dt;
    if (forcing_.species_source) {
      in.volume_source = [&, k](Point2 x, int tag) { return forcing_.species_source(k, x, tag, t_new); };
    }
    if (forcing_.species_boundary) {
      in.exterior_flux = [&, k](Point2 x, Point2 n, int tag) { return forcing_.species_boundary(k, x, n, tag, t_new); };
    }
    const SparseSystem sys = assemble_knp(in);
    const auto t0 = std::chrono::steady_clock::now();
    const AmgHierarchy* pc = frozen_knp_[i].get();
    std::unique_ptr<AmgHierarchy> fresh;
    if (!pc) {
      fresh = std::make_unique<AmgHierarchy>(amg_build(sys.matrix, cfg_.solver.amg));
      pc = fresh.get();
    }
    DgField c = state_.conc[k];
    SolveReport r = require(gmres(sys, *pc, c.values(), cfg_.solver.gmres), cfg_.species[k].name.c_str(), rep.step,
                            t_new);
    r.seconds = seconds_since(t0);
    rep.knp.emplace_back(cfg_.species[k].name, r);
    if (cfg_.solver.freeze_hierarchy && fresh) frozen_knp_[i] = std::move(fresh);
    if (keep_matrices_) last_matrices_.knp.emplace_back(cfg_.species[k].name, sys.matrix);
    next.push_back(std::move(c));
  }

  // Membrane potential from the new traces, then the eliminated species.
  state_.membrane.phi_M = membrane_jump(state_.phi, membrane_);
  for (std::size_t i = 0; i < solved_.size(); ++i) state_.conc[solved_[i]] = std::move(next[i]);
  state_.conc[eliminated_] = recover_eliminated(solved_fields(state_, solved_), cfg_.species);
  state_.step = rep.step;
  state_.t = t_new;
  return rep;
}

std::vector<DgField> solved_fields(const SimulationState& s, std::span<const std::size_t> solved) {
  std::vector<DgField> out;
  out.reserve(solved.size());
  for (std::size_t k : solved) out.push_back(s.conc.at(k));
  return out;
}

double charge_weighted_mass(std::span<const DgField> conc, std::span<const IonSpecies> species) {
  double total = 0.0;
  for (std::size_t k = 0; k < conc.size(); ++k) total += species[k].valence * integrate(conc[k]);
  return total;
}

double electroneutrality_defect(std::span<const DgField> conc, std::span<const IonSpecies> species) {
  if (conc.empty()) return 0.0;
  double worst = 0.0;
  for (Index d = 0; d < conc[0].size(); ++d) {
    double q = 0.0;
    for (std::size_t k = 0; k < conc.size(); ++k) q += species[k].valence * conc[k].data()[d];
    worst = std::max(worst, std::abs(q));
  }
  return worst;
}

DgField peclet_ratio(const DgField& c, const DgField& phi, const IonSpecies& species, const PhysicalConstants& consts,
                     double eps) {
  const DgSpace& space = c.space();
  const BasisTable& tab = space.volume_table();
  const TriangleRule& rule = space.volume_rule();
  const int n = space.local_size();
  const double D = species.diffusivity;
  const double zpsi = std::abs(species.valence) * consts.psi();
  DgField out(c.space_ptr());
  std::array<double, kMaxLocalDofs * kMaxLocalDofs> m{};
  std::array<double, kMaxLocalDofs> b{};
  for (Index cell = 0; cell < space.mesh().num_cells(); ++cell) {
    const CellGeometry& geo = space.geometry(cell);
    m.fill(0.0);
    b.fill(0.0);
    for (int q = 0; q < tab.num_points; ++q) {
      Point2 gc, gp;
      double cv = 0.0;
      for (int i = 0; i < n; ++i) {
        gc = gc + c.data()[space.dof(cell, i)] * tab.g(q, i);
        gp = gp + phi.data()[space.dof(cell, i)] * tab.g(q, i);
        cv += c.data()[space.dof(cell, i)] * tab.v(q, i);
      }
      const double diff = D * norm(geo.map_gradient(gc));
      const double drift = zpsi * std::abs(cv) * D * norm(geo.map_gradient(gp));
      const double ratio = (diff - drift) / std::max(diff, eps);
      const double w = rule.weights[q] * geo.det;
      for (int i = 0; i < n; ++i) {
        b[i] += w * ratio * tab.v(q, i);
        for (int j = 0; j < n; ++j) m[i * n + j] += w * tab.v(q, i) * tab.v(q, j);
      }
    }
    // Local mass matrix is SPD: Gaussian elimination without pivoting is stable.
    for (int p = 0; p < n; ++p) {
      for (int r = p + 1; r < n; ++r) {
        const double l = m[r * n + p] / m[p * n + p];
        for (int j = p; j < n; ++j) m[r * n + j] -= l * m[p * n + j];
        b[r] -= l * b[p];
      }
    }
    for (int r = n - 1; r >= 0; --r) {
      double s = b[r];
      for (int j = r + 1; j < n; ++j) s -= m[r * n + j] * b[j];
      b[r] = s / m[r * n + r];
    }
    for (int i = 0; i < n; ++i) out.data()[space.dof(cell, i)] = b[i];
  }
  return out;
}

}  // namespace knpemi
