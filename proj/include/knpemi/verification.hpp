#pragma once

#include <array>
#include <ostream>
#include <string>
#include <vector>

#include "knpemi/timeloop.hpp"

namespace knpemi {

/// One-variable factor of a separable term: 1, s, sin(w s) or cos(w s).
struct Factor {
  enum class Kind { One, Linear, Sin, Cos };
  Kind kind = Kind::One;
  double omega = 0.0;

  static Factor one() { return {}; }
  static Factor linear() { return {Kind::Linear, 0.0}; }
  static Factor sin(double w) { return {Kind::Sin, w}; }
  static Factor cos(double w) { return {Kind::Cos, w}; }

  double value(double s) const;
  double d1(double s) const;
  double d2(double s) const;
};

/// coef * X(x) * Y(y) * T(t)
struct SeparableTerm {
  double coef = 0.0;
  Factor x, y, t;
};

/// Finite sum of separable terms with closed-form derivatives.
class Expr {
 public:
  Expr() = default;
  explicit Expr(std::vector<SeparableTerm> terms) : terms_(std::move(terms)) {}
  static Expr constant(double c) { return Expr({{c, Factor::one(), Factor::one(), Factor::one()}}); }

  double value(Point2 p, double t) const;
  Point2 gradient(Point2 p, double t) const;
  double laplacian(Point2 p, double t) const;
  double time_derivative(Point2 p, double t) const;

  std::span<const SeparableTerm> terms() const { return terms_; }
  Expr operator+(const Expr& other) const;
  Expr scaled(double s) const;

 private:
  std::vector<SeparableTerm> terms_;
};

/// Exact solution per compartment (0 = intracellular, 1 = extracellular) for
/// every species and the potential. The eliminated species is derived from
/// electroneutrality.
struct MmsProblem {
  std::string name;
  std::vector<IonSpecies> species;
  PhysicalConstants consts;
  Rect box;
  Rect ics;
  std::vector<std::array<Expr, 2>> conc;
  std::array<Expr, 2> phi;

  static int side(int cell_tag) { return cell_tag == kEcsTag ? 1 : 0; }

  double concentration(std::size_t k, Point2 x, int side, double t) const { return conc[k][side].value(x, t); }
  double potential(Point2 x, int side, double t) const { return phi[side].value(x, t); }
  /// Exact phi_i - phi_e at a membrane point.
  double membrane_potential(Point2 x, double t) const;

  /// -D (grad c + z psi c grad phi)
  Point2 flux(std::size_t k, Point2 x, int side, double t) const;
  /// div J; closed form.
  double flux_divergence(std::size_t k, Point2 x, int side, double t) const;
  /// dc/dt + div J
  double species_source(std::size_t k, Point2 x, int side, double t) const;
  /// F sum_k z_k div J_k, the source of the potential equation.
  double potential_source(Point2 x, int side, double t) const;
  /// F sum_k z_k J_k . n
  double current(Point2 x, Point2 n, int side, double t) const;

  /// Interface data for one step ending at t_new. `phi_M_prev` holds the
  /// discrete membrane potential of the previous step at `points`.
  InterfaceData interface_data(const MembraneGeometry& geom, const DgSpace& space, std::span<const double> phi_M_prev,
                               double t_new, double dt) const;

  /// Forcing hooks for a Simulation.
  ExternalForcing forcing() const;
};

/// Na+, K+ (eliminated), Cl- with diffusivities that keep the conductivity of
/// the manufactured triple positive.
std::vector<IonSpecies> mms_species();

/// Smooth stationary solution on the unit square with a centred inclusion.
MmsProblem mms_spatial_problem();
/// Linear-in-space, sinusoidal-in-time solution on the same geometry.
MmsProblem mms_temporal_problem();

/// Rebuilds the derived concentration of the eliminated species.
void derive_eliminated(MmsProblem& p);

struct RateRow {
  double parameter = 0.0;           // h or dt
  std::vector<double> errors;       // one per variable
  std::vector<double> rates;        // empty on the first row
};

struct RateTable {
  std::string parameter_name;       // "h" or "dt"
  std::vector<std::string> variables;
  std::vector<RateRow> rows;
  double seconds = 0.0;

  /// Appends a row and fills its rates from the previous one.
  void add(double parameter, std::vector<double> errors);
  void write_csv(std::ostream& os) const;
  void write_text(std::ostream& os) const;
};

struct StudyOptions {
  int degree = 1;
  std::vector<int> resolutions{16, 32, 64, 128, 256};
  double dt = 1e-10;
  int steps = 2;
  SolverSettings solver;
  bool project_initial = false;  // nodal interpolation by default
};

/// Runs the problem to steps*dt on every resolution; errors of the two solved
/// species and of the mean-free potential.
RateTable spatial_study(const MmsProblem& problem, const StudyOptions& opts);

struct TemporalOptions {
  int resolution = 16;
  std::vector<double> dts{5e-3, 2.5e-3, 1.25e-3, 6.25e-4, 3.125e-4, 1.5625e-4, 7.8125e-5};
  double t_end = 1e-2;
  SolverSettings solver;
  bool project_initial = false;
};

RateTable temporal_study(const MmsProblem& problem, const TemporalOptions& opts);

/// One acceptance band: observed must lie in [lo, hi].
struct Band {
  std::string name;
  double observed = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool pass() const { return observed >= lo && observed <= hi; }
};

/// Rates on the two finest pairs within 0.15 of p + 1 for every variable,
/// and errors at h = sqrt(2)/128 within a factor 3 of the reference values
/// when that resolution is part of the table.
std::vector<Band> spatial_bands(const RateTable& table, int degree);

/// Rates on the two finest pairs within 0.1 of 1 and the potential's rate
/// at the first refinement within 0.2 of the reference pre-asymptotic rate.
std::vector<Band> temporal_bands(const RateTable& table);

bool all_pass(const std::vector<Band>& bands);
void write_bands(std::ostream& os, const std::vector<Band>& bands);

/// L2 errors (c of each solved species, then phi without its mean) of the
/// current state against the exact solution at the state's time.
std::vector<double> mms_errors(const Simulation& sim, const MmsProblem& problem);

/// Runs one configuration and returns its errors.
std::vector<double> mms_run(const MmsProblem& problem, int n, int degree, double dt, int steps,
                            const SolverSettings& solver, bool project_initial);

}  // namespace knpemi
