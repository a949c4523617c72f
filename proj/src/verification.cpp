#include "knpemi/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace knpemi {

double Factor::value(double s) const {
  switch (kind) {
    case Kind::One: return 1.0;
    case Kind::Linear: return s;
    case Kind::Sin: return std::sin(omega * s);
    case Kind::Cos: return std::cos(omega * s);
  }
  return 0.0;
}

double Factor::d1(double s) const {
  switch (kind) {
    case Kind::One: return 0.0;
    case Kind::Linear: return 1.0;
    case Kind::Sin: return omega * std::cos(omega * s);
    case Kind::Cos: return -omega * std::sin(omega * s);
  }
  return 0.0;
}

double Factor::d2(double s) const {
  switch (kind) {
    case Kind::One:
    case Kind::Linear: return 0.0;
    case Kind::Sin: return -omega * omega * std::sin(omega * s);
    case Kind::Cos: return -omega * omega * std::cos(omega * s);
  }
  return 0.0;
}

double Expr::value(Point2 p, double t) const {
  double s = 0.0;
  for (const SeparableTerm& term : terms_) s += term.coef * term.x.value(p.x) * term.y.value(p.y) * term.t.value(t);
  return s;
}

Point2 Expr::gradient(Point2 p, double t) const {
  Point2 g;
  for (const SeparableTerm& term : terms_) {
    const double tt = term.coef * term.t.value(t);
    g.x += tt * term.x.d1(p.x) * term.y.value(p.y);
    g.y += tt * term.x.value(p.x) * term.y.d1(p.y);
  }
  return g;
}

double Expr::laplacian(Point2 p, double t) const {
  double s = 0.0;
  for (const SeparableTerm& term : terms_) {
    s += term.coef * term.t.value(t) *
         (term.x.d2(p.x) * term.y.value(p.y) + term.x.value(p.x) * term.y.d2(p.y));
  }
  return s;
}

double Expr::time_derivative(Point2 p, double t) const {
  double s = 0.0;
  for (const SeparableTerm& term : terms_) s += term.coef * term.x.value(p.x) * term.y.value(p.y) * term.t.d1(t);
  return s;
}

Expr Expr::operator+(const Expr& other) const {
  std::vector<SeparableTerm> all = terms_;
  all.insert(all.end(), other.terms_.begin(), other.terms_.end());
  return Expr(std::move(all));
}

Expr Expr::scaled(double s) const {
  std::vector<SeparableTerm> all = terms_;
  for (SeparableTerm& t : all) t.coef *= s;
  return Expr(std::move(all));
}

double MmsProblem::membrane_potential(Point2 x, double t) const { return potential(x, 0, t) - potential(x, 1, t); }

Point2 MmsProblem::flux(std::size_t k, Point2 x, int s, double t) const {
  const IonSpecies& sp = species[k];
  const double c = conc[k][s].value(x, t);
  const Point2 gc = conc[k][s].gradient(x, t);
  const Point2 gp = phi[s].gradient(x, t);
  const double drift = sp.valence * consts.psi() * c;
  return -sp.diffusivity * (gc + drift * gp);
}

double MmsProblem::flux_divergence(std::size_t k, Point2 x, int s, double t) const {
  const IonSpecies& sp = species[k];
  const double c = conc[k][s].value(x, t);
  const double lap_c = conc[k][s].laplacian(x, t);
  const double lap_p = phi[s].laplacian(x, t);
  const double cross = dot(conc[k][s].gradient(x, t), phi[s].gradient(x, t));
  return -sp.diffusivity * (lap_c + sp.valence * consts.psi() * (cross + c * lap_p));
}

double MmsProblem::species_source(std::size_t k, Point2 x, int s, double t) const {
  return conc[k][s].time_derivative(x, t) + flux_divergence(k, x, s, t);
}

double MmsProblem::potential_source(Point2 x, int s, double t) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < species.size(); ++k) sum += species[k].valence * flux_divergence(k, x, s, t);
  return consts.faraday * sum;
}

double MmsProblem::current(Point2 x, Point2 n, int s, double t) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < species.size(); ++k) sum += species[k].valence * dot(flux(k, x, s, t), n);
  return consts.faraday * sum;
}

InterfaceData MmsProblem::interface_data(const MembraneGeometry& geom, const DgSpace& space,
                                         std::span<const double> phi_M_prev, double t_new, double dt) const {
  const double cm = consts.capacitance;
  const double F = consts.faraday;
  InterfaceData data;
  data.points.resize(geom.size());
  for (std::size_t p = 0; p < geom.size(); ++p) {
    const Point2 x = geom[p].x;
    const Point2 n = space.normal(geom[p].facet);  // out of the intracellular side
    const double dphi_M = phi[0].time_derivative(x, t_new) - phi[1].time_derivative(x, t_new);
    InterfacePoint& ip = data.points[p];
    ip.C = cm / dt;
    ip.g.resize(species.size());
    ip.C_species.resize(species.size());
    for (int s = 0; s < 2; ++s) {
      double weight_sum = 0.0;
      std::vector<double> alpha(species.size());
      for (std::size_t k = 0; k < species.size(); ++k) {
        const IonSpecies& sp = species[k];
        alpha[k] = sp.diffusivity * sp.valence * sp.valence * std::abs(concentration(k, x, s, t_new));
        weight_sum += alpha[k];
      }
      double total = 0.0;
      for (std::size_t k = 0; k < species.size(); ++k) {
        alpha[k] /= weight_sum;
        // channel current that closes the species balance for the exact solution
        const double ich = species[k].valence * F * dot(flux(k, x, s, t_new), n) - alpha[k] * cm * dphi_M;
        total += ich;
        ip.g[k][s] = phi_M_prev[p] - dt * ich / (cm * alpha[k]);
        ip.C_species[k][s] = alpha[k] * cm / (F * species[k].valence * dt);
      }
      ip.f[s] = phi_M_prev[p] - dt * total / cm;
    }
  }
  return data;
}

ExternalForcing MmsProblem::forcing() const {
  ExternalForcing f;
  const MmsProblem* self = this;
  f.potential_source = [self](Point2 x, int tag, double t) { return self->potential_source(x, side(tag), t); };
  f.potential_boundary = [self](Point2 x, Point2 n, int tag, double t) { return self->current(x, n, side(tag), t); };
  f.species_source = [self](std::size_t k, Point2 x, int tag, double t) {
    return self->species_source(k, x, side(tag), t);
  };
  f.species_boundary = [self](std::size_t k, Point2 x, Point2 n, int tag, double t) {
    return dot(self->flux(k, x, side(tag), t), n);
  };
  return f;
}

std::vector<IonSpecies> mms_species() {
  return {
      {"Na", 1, 2.0e-9, 0.0, 0.0, 0.0, false},
      {"K", 1, 0.1e-9, 0.0, 0.0, 0.0, true},
      {"Cl", -1, 1.0e-9, 0.0, 0.0, 0.0, false},
  };
}

void derive_eliminated(MmsProblem& p) {
  const std::size_t m = eliminated_index(p.species);
  for (int s = 0; s < 2; ++s) {
    Expr sum;
    for (std::size_t k = 0; k < p.species.size(); ++k) {
      if (k == m) continue;
      sum = sum + p.conc[k][s].scaled(-static_cast<double>(p.species[k].valence) / p.species[m].valence);
    }
    p.conc[m][s] = sum;
  }
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

MmsProblem unit_square(std::string name) {
  MmsProblem p;
  p.name = std::move(name);
  p.species = mms_species();
  p.box = {0.0, 1.0, 0.0, 1.0};
  p.ics = {0.25, 0.75, 0.25, 0.75};
  p.conc.resize(p.species.size());
  return p;
}

SeparableTerm term(double c, Factor x, Factor y, Factor t = Factor::one()) { return {c, x, y, t}; }

}  // namespace

MmsProblem mms_spatial_problem() {
  MmsProblem p = unit_square("stationary");
  const Factor one = Factor::one();
  const Factor s = Factor::sin(kTwoPi), c = Factor::cos(kTwoPi);
  const std::size_t na = species_index(p.species, "Na"), cl = species_index(p.species, "Cl");
  p.conc[na][0] = Expr({term(0.7, one, one), term(0.3, s, s)});
  p.conc[cl][0] = Expr({term(0.3, one, one), term(0.4, c, s)});
  p.phi[0] = Expr({term(1.0, c, c)});
  p.conc[na][1] = Expr({term(0.7, one, one), term(0.2, c, c)});
  p.conc[cl][1] = Expr({term(0.3, one, one), term(0.8, s, c)});
  p.phi[1] = Expr({term(1.0, s, s)});
  derive_eliminated(p);
  return p;
}

MmsProblem mms_temporal_problem() {
  MmsProblem p = unit_square("temporal");
  const Factor one = Factor::one(), lin = Factor::linear();
  const Factor st = Factor::sin(kTwoPi), ct = Factor::cos(kTwoPi);
  const std::size_t na = species_index(p.species, "Na"), cl = species_index(p.species, "Cl");
  const Expr plane({term(1.0, one, one), term(1.0, lin, one), term(1.0, one, lin)});
  p.conc[na][0] = plane + Expr({term(0.3, one, one, ct)});
  p.conc[cl][0] = plane + Expr({term(0.2, one, one, ct)});
  p.phi[0] = plane;
  p.conc[na][1] = plane + Expr({term(0.5, one, one, st)});
  p.conc[cl][1] = plane + Expr({term(0.6, one, one, st)});
  p.phi[1] = plane;
  derive_eliminated(p);
  return p;
}

void RateTable::add(double parameter, std::vector<double> errors) {
  RateRow row;
  row.parameter = parameter;
  if (!rows.empty()) {
    const RateRow& prev = rows.back();
    const double ratio = prev.parameter / parameter;
    for (std::size_t i = 0; i < errors.size(); ++i) {
      row.rates.push_back(std::log(prev.errors[i] / errors[i]) / std::log(ratio));
    }
  }
  row.errors = std::move(errors);
  rows.push_back(std::move(row));
}

void RateTable::write_csv(std::ostream& os) const {
  os << parameter_name;
  for (const std::string& v : variables) os << ",error_" << v << ",rate_" << v;
  os << "\n";
  os << std::setprecision(6);
  for (const RateRow& r : rows) {
    os << r.parameter;
    for (std::size_t i = 0; i < r.errors.size(); ++i) {
      os << "," << r.errors[i] << ",";
      if (!r.rates.empty()) os << r.rates[i];
    }
    os << "\n";
  }
}

void RateTable::write_text(std::ostream& os) const {
  std::ostringstream head;
  head << std::left << std::setw(10) << parameter_name;
  for (const std::string& v : variables) head << std::setw(18) << ("e_" + v + " (r)");
  os << head.str() << "\n" << std::string(head.str().size(), '-') << "\n";
  for (const RateRow& r : rows) {
    std::ostringstream line;
    line << std::left << std::setw(10) << std::setprecision(3) << r.parameter;
    for (std::size_t i = 0; i < r.errors.size(); ++i) {
      std::ostringstream cell;
      cell << std::scientific << std::setprecision(2) << r.errors[i];
      if (r.rates.empty()) {
        cell << " --";
      } else {
        cell << " (" << std::fixed << std::setprecision(2) << r.rates[i] << ")";
      }
      line << std::setw(18) << cell.str();
    }
    os << line.str() << "\n";
  }
}

std::vector<double> mms_errors(const Simulation& sim, const MmsProblem& problem) {
  const double t = sim.state().t;
  std::vector<double> out;
  for (std::size_t k : sim.solved_species()) {
    out.push_back(l2_error(sim.state().conc[k], [&](Point2 x, int tag) {
      return problem.concentration(k, x, MmsProblem::side(tag), t);
    }));
  }
  const DgSpace& space = sim.space();
  const double area = problem.box.area();
  const auto exact_phi = [&](Point2 x, int tag) { return problem.potential(x, MmsProblem::side(tag), t); };
  const double exact_mean = integrate(space, exact_phi, 2 * space.degree() + 4) / area;
  const double discrete_mean = integrate(sim.state().phi) / area;
  DgField shifted = sim.state().phi;
  for (double& v : shifted.data()) v -= discrete_mean;
  out.push_back(l2_error(shifted, [&](Point2 x, int tag) { return exact_phi(x, tag) - exact_mean; }));
  return out;
}

std::vector<double> mms_run(const MmsProblem& problem, int n, int degree, double dt, int steps,
                            const SolverSettings& solver, bool project_initial) {
  SimulationConfig cfg;
  cfg.geometry.box = problem.box;
  cfg.geometry.ics = {problem.ics};
  cfg.geometry.nx = n;
  cfg.geometry.ny = n;
  cfg.species = problem.species;
  // initial-value fields are unused; validation requires positive entries
  for (IonSpecies& s : cfg.species) s.c_ics = s.c_ecs = 1.0;
  cfg.consts = problem.consts;
  cfg.membrane.model = MembraneModel::Passive;
  cfg.membrane.stimulus.enabled = false;
  cfg.degree = degree;
  cfg.dt = dt;
  cfg.dt_ode = dt;
  cfg.t_end = dt * steps;
  cfg.solver = solver;

  ExternalForcing forcing = problem.forcing();
  // The simulation is created below; the interface hook reads it through this pointer.
  const Simulation* sim_ptr = nullptr;
  forcing.interface = [&problem, &sim_ptr, dt](const SimulationState& state, double t_new) {
    return problem.interface_data(sim_ptr->membrane(), sim_ptr->space(), state.membrane.phi_M, t_new, dt);
  };
  Simulation sim(cfg, forcing);
  sim_ptr = &sim;

  auto initial = [&](const PointFunction& f) {
    return project_initial ? l2_projection(sim.space_ptr(), f) : interpolate(sim.space_ptr(), f);
  };
  std::vector<DgField> c0;
  for (std::size_t k : sim.solved_species()) {
    c0.push_back(initial([&](Point2 x, int tag) { return problem.concentration(k, x, MmsProblem::side(tag), 0.0); }));
  }
  sim.set_concentrations(std::move(c0));
  sim.set_potential(initial([&](Point2 x, int tag) { return problem.potential(x, MmsProblem::side(tag), 0.0); }));
  std::vector<double> phi_M0(sim.membrane().size());
  for (std::size_t p = 0; p < phi_M0.size(); ++p) phi_M0[p] = problem.membrane_potential(sim.membrane()[p].x, 0.0);
  sim.set_membrane_potential(std::move(phi_M0));

  for (int s = 0; s < steps; ++s) {
    try {
      sim.step();
    } catch (const NumericalError& e) {
      std::ostringstream msg;
      msg << "verification run n = " << n << ", p = " << degree << ", dt = " << dt << ": " << e.what();
      throw NumericalError(msg.str());
    }
  }
  return mms_errors(sim, problem);
}

namespace {

std::vector<std::string> variable_names(const MmsProblem& problem) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < problem.species.size(); ++k) {
    if (!problem.species[k].eliminated) names.push_back(problem.species[k].name);
  }
  names.push_back("phi");
  return names;
}

}  // namespace

RateTable spatial_study(const MmsProblem& problem, const StudyOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  RateTable table;
  table.parameter_name = "h";
  table.variables = variable_names(problem);
  for (int n : opts.resolutions) {
    const double h = std::hypot(problem.box.width(), problem.box.height()) / n;
    table.add(h, mms_run(problem, n, opts.degree, opts.dt, opts.steps, opts.solver, opts.project_initial));
  }
  table.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return table;
}

RateTable temporal_study(const MmsProblem& problem, const TemporalOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  RateTable table;
  table.parameter_name = "dt";
  table.variables = variable_names(problem);
  for (double dt : opts.dts) {
    const int steps = static_cast<int>(std::lround(opts.t_end / dt));
    if (steps < 1 || std::abs(steps * dt - opts.t_end) > 1e-9 * opts.t_end) {
      throw ConfigError("temporal study: end time must be a multiple of every time step");
    }
    table.add(dt, mms_run(problem, opts.resolution, 1, dt, steps, opts.solver, opts.project_initial));
  }
  table.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return table;
}

namespace {

// Reference errors (Na, Cl, phi) at h = sqrt(2)/128 for p = 1 and p = 2.
constexpr std::array<double, 3> kReferenceP1{5.61e-5, 5.68e-5, 1.48e-4};
constexpr std::array<double, 3> kReferenceP2{2.13e-7, 2.13e-7, 1.94e-7};
constexpr double kReferencePreAsymptoticPhiRate = 0.59;

void finest_rate_bands(const RateTable& t, double expected, double tol, std::vector<Band>& out) {
  if (t.rows.size() < 3) throw ConfigError("rate table needs at least three rows for the two finest pairs");
  for (std::size_t r = t.rows.size() - 2; r < t.rows.size(); ++r) {
    for (std::size_t v = 0; v < t.variables.size(); ++v) {
      std::ostringstream name;
      name << "rate " << t.variables[v] << " at " << t.parameter_name << " = " << std::setprecision(3)
           << t.rows[r].parameter;
      out.push_back({name.str(), t.rows[r].rates[v], expected - tol, expected + tol});
    }
  }
}

}  // namespace

std::vector<Band> spatial_bands(const RateTable& table, int degree) {
  if (degree != 1 && degree != 2) throw ConfigError("spatial bands exist for degree 1 and 2");
  std::vector<Band> out;
  finest_rate_bands(table, degree + 1.0, 0.15, out);
  const auto& ref = degree == 1 ? kReferenceP1 : kReferenceP2;
  const double h_ref = std::sqrt(2.0) / 128.0;
  for (const RateRow& row : table.rows) {
    if (std::abs(row.parameter - h_ref) > 1e-9 * h_ref) continue;
    for (std::size_t v = 0; v < std::min(ref.size(), row.errors.size()); ++v) {
      out.push_back({"error " + table.variables[v] + " at h = 0.011 (x3 band)", row.errors[v], ref[v] / 3.0, ref[v] * 3.0});
    }
  }
  return out;
}

std::vector<Band> temporal_bands(const RateTable& table) {
  std::vector<Band> out;
  finest_rate_bands(table, 1.0, 0.1, out);
  const auto phi = std::find(table.variables.begin(), table.variables.end(), "phi");
  if (phi != table.variables.end()) {
    const auto v = static_cast<std::size_t>(phi - table.variables.begin());
    out.push_back({"phi rate at the first refinement", table.rows[1].rates[v], kReferencePreAsymptoticPhiRate - 0.2,
                   kReferencePreAsymptoticPhiRate + 0.2});
  }
  return out;
}

bool all_pass(const std::vector<Band>& bands) {
  return std::all_of(bands.begin(), bands.end(), [](const Band& b) { return b.pass(); });
}

void write_bands(std::ostream& os, const std::vector<Band>& bands) {
  for (const Band& b : bands) {
    os << (b.pass() ? "  ok    " : "  MISS  ") << std::left << std::setw(40) << b.name << std::right
       << std::scientific << std::setprecision(3) << b.observed << " in [" << b.lo << ", " << b.hi << "]\n";
    os << std::defaultfloat;
  }
}

}  // namespace knpemi
