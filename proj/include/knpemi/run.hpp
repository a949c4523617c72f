#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "knpemi/scenario.hpp"

namespace knpemi {

/// Denominator guard of the Peclet snapshots, mol/(m^2 s).
inline constexpr double kPecletEps = 1e-12;

struct RunSummary {
  std::string scenario;
  long steps = 0;
  double t_end = 0.0;
  double wall_seconds = 0.0;
  std::vector<std::string> species;
  std::vector<double> initial_mass;   // mol per unit depth
  std::vector<double> final_mass;
  double initial_charge = 0.0;        // sum_k z_k mass_k
  double final_charge = 0.0;
  double max_electroneutrality_defect = 0.0;
  long long clamps = 0;
  int max_cg_iterations = 0;
  int max_gmres_iterations = 0;
  double mean_cg_iterations = 0.0;
  double mean_gmres_iterations = 0.0;
  std::vector<Point2> probes;         // matched membrane points
  std::vector<double> final_probe_phi_M;
};

/// Called after every step, before artifacts of that step are written.
using StepObserver = std::function<void(const Simulation&, const StepReport&)>;

/// Steps a scenario to t_end and writes into cfg.output_dir:
///   config.ini      effective configuration (re-parsable)
///   probes.csv      step, t, phi_M at each probe (one row per step)
///   iterations.csv  step, t, subsystem, iterations, residual, seconds
///   summary.json    masses, clamps, iteration statistics, wall time
///   snapshots/step_%06d_<field>.vtk every snapshot_every steps
///   matrices/step_%06d_<system>.mtx when dump_matrices is set
/// Throws NumericalError on solver failure or when clamps exceed clamp_limit,
/// IoError on file failures.
RunSummary run_simulation(const ScenarioConfig& cfg, const StepObserver& observer = {}, std::ostream* log = nullptr);

/// Aligned-text summary of a run directory's iterations.csv and probes.csv.
std::string run_report(const std::filesystem::path& dir);

/// Applies the thread count to the parallel kernels; no-op without OpenMP.
void set_thread_count(int threads);

}  // namespace knpemi
