#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "knpemi/knp_assembly.hpp"
#include "knpemi/linalg.hpp"
#include "knpemi/membrane.hpp"

namespace knpemi {

struct SolverSettings {
  KrylovOptions cg{1e-5, 2000, 30};
  KrylovOptions gmres{1e-7, 2000, 30};
  AmgParams amg;
  double emi_shift = 0.0;        // alpha in A + alpha M; <= 0 selects mean(kappa) / diameter^2
  bool freeze_hierarchy = false;  // reuse the first step's AMG hierarchies
  friend bool operator==(const SolverSettings&, const SolverSettings&) = default;
};

struct SimulationConfig {
  GeometrySpec geometry;
  std::vector<IonSpecies> species = default_species();
  PhysicalConstants consts;
  MembraneParams membrane;
  double phi_M0 = -0.06774;  // V
  double dt = 1e-4;          // s
  double dt_ode = 1e-4;      // s, maximum ODE step
  double t_end = 1e-3;       // s
  int degree = 1;
  double beta = 0.0;         // <= 0 selects 20 d p
  double gamma = 0.0;        // <= 0 selects 20 d p
  SolverSettings solver;
  OdeOptions ode;

  double penalty_beta() const { return beta > 0.0 ? beta : default_penalty(degree); }
  double penalty_gamma() const { return gamma > 0.0 ? gamma : default_penalty(degree); }
  friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

void validate(const SimulationConfig& cfg);

struct SimulationState {
  double t = 0.0;
  long step = 0;
  std::vector<DgField> conc;  // every species; the eliminated one is recovered
  DgField phi;
  MembraneState membrane;
};

struct StepReport {
  long step = 0;
  double t = 0.0;
  SolveReport emi;
  std::vector<std::pair<std::string, SolveReport>> knp;  // per solved species
  long long clamps = 0;
  OdeStats ode;
  double emi_asymmetry = 0.0;
};

/// Replaces the membrane model and adds sources for verification problems.
/// Times passed to the callbacks are the new time level t^n.
struct ExternalForcing {
  std::function<InterfaceData(const SimulationState& state, double t_new)> interface;
  std::function<double(Point2 x, int tag, double t)> potential_source;
  std::function<double(Point2 x, Point2 n, int tag, double t)> potential_boundary;
  std::function<double(std::size_t species, Point2 x, int tag, double t)> species_source;
  std::function<double(std::size_t species, Point2 x, Point2 n, int tag, double t)> species_boundary;
};

/// Matrices of one step, kept when dumping is requested.
struct StepMatrices {
  CsrMatrix emi;
  std::vector<std::pair<std::string, CsrMatrix>> knp;
};

/// Godunov splitting: membrane ODEs with I_M = 0, then the potential
/// problem, then one transport problem per solved species.
class Simulation {
 public:
  explicit Simulation(SimulationConfig cfg, ExternalForcing forcing = {});

  const SimulationConfig& config() const { return cfg_; }
  const SimulationState& state() const { return state_; }
  const DgSpace& space() const { return *space_; }
  const std::shared_ptr<const DgSpace>& space_ptr() const { return space_; }
  const Mesh2D& mesh() const { return *mesh_; }
  const MembraneGeometry& membrane() const { return membrane_; }
  const CsrMatrix& mass_matrix() const { return mass_; }

  /// Overrides the initial data; the eliminated species is recovered.
  void set_concentrations(std::vector<DgField> solved);
  void set_potential(DgField phi);
  void set_membrane_potential(std::vector<double> phi_M);

  /// Advances one time step.
  StepReport step();

  void keep_matrices(bool keep) { keep_matrices_ = keep; }
  const StepMatrices& last_matrices() const { return last_matrices_; }

  /// Species indices solved for, in species order.
  const std::vector<std::size_t>& solved_species() const { return solved_; }

 private:
  InterfaceData membrane_interface(double t_new, StepReport& rep);

  SimulationConfig cfg_;
  ExternalForcing forcing_;
  std::shared_ptr<const Mesh2D> mesh_;
  std::shared_ptr<const DgSpace> space_;
  std::unique_ptr<DgPattern> pattern_;
  MembraneGeometry membrane_;
  CsrMatrix mass_;
  SimulationState state_;
  std::vector<std::size_t> solved_;
  std::size_t eliminated_ = 0;
  double diameter_ = 0.0;
  std::unique_ptr<AmgHierarchy> frozen_emi_;
  std::vector<std::unique_ptr<AmgHierarchy>> frozen_knp_;
  bool keep_matrices_ = false;
  StepMatrices last_matrices_;
};

/// Fields of the solved species from the full list.
std::vector<DgField> solved_fields(const SimulationState& s, std::span<const std::size_t> solved);

/// sum_k z_k * integral of c_k over every species.
double charge_weighted_mass(std::span<const DgField> conc, std::span<const IonSpecies> species);
/// max over coefficients of |sum_k z_k c_k|.
double electroneutrality_defect(std::span<const DgField> conc, std::span<const IonSpecies> species);

/// (|D grad c| - |z c psi D grad phi|) / max(|D grad c|, eps) at volume
/// quadrature points, L2-projected elementwise onto the DG space.
DgField peclet_ratio(const DgField& c, const DgField& phi, const IonSpecies& species, const PhysicalConstants& consts,
                     double eps);

}  // namespace knpemi
