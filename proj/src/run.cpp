#include "knpemi/run.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iomanip>
#include <map>
#include <sstream>

#include "json.hpp"
#include "knpemi/io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace knpemi {

namespace {

std::string step_name(long step, const std::string& field) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%06ld_", step);
  return buf + field;
}

void write_snapshot(const std::filesystem::path& dir, const Simulation& sim) {
  const SimulationState& s = sim.state();
  const auto& species = sim.config().species;
  io::write_vtk_field(dir / (step_name(s.step, "phi") + ".vtk"), s.phi, "phi");
  for (std::size_t k = 0; k < species.size(); ++k) {
    io::write_vtk_field(dir / (step_name(s.step, "c_" + species[k].name) + ".vtk"), s.conc[k], "c_" + species[k].name);
    const DgField pe = peclet_ratio(s.conc[k], s.phi, species[k], sim.config().consts, kPecletEps);
    io::write_vtk_field(dir / (step_name(s.step, "peclet_" + species[k].name) + ".vtk"), pe, "peclet_" + species[k].name);
  }
  std::vector<Point2> pts;
  pts.reserve(sim.membrane().size());
  for (const MembranePoint& p : sim.membrane().points()) pts.push_back(p.x);
  io::write_vtk_points(dir / (step_name(s.step, "phi_M") + ".vtk"), pts, s.membrane.phi_M, "phi_M");
}

void write_matrices(const std::filesystem::path& dir, long step, const StepMatrices& m) {
  io::write_matrix_market(dir / (step_name(step, "emi") + ".mtx"), m.emi);
  for (const auto& [name, a] : m.knp) io::write_matrix_market(dir / (step_name(step, "knp_" + name) + ".mtx"), a);
}

std::vector<double> masses(const SimulationState& s) {
  std::vector<double> out;
  for (const DgField& c : s.conc) out.push_back(integrate(c));
  return out;
}

}  // namespace

void set_thread_count(int threads) {
#ifdef _OPENMP
  omp_set_num_threads(std::max(1, threads));
#else
  (void)threads;
#endif
}

RunSummary run_simulation(const ScenarioConfig& cfg, const StepObserver& observer, std::ostream* log) {
  validate(cfg);
  set_thread_count(cfg.threads);
  const auto t0 = std::chrono::steady_clock::now();
  const std::filesystem::path& out = cfg.output_dir;
  io::ensure_directory(out);
  {
    auto echo = io::open_output(out / "config.ini");
    echo << format_config(cfg);
  }

  Simulation sim(cfg.sim);
  sim.keep_matrices(cfg.dump_matrices);
  const auto& species = cfg.sim.species;

  RunSummary sum;
  sum.scenario = cfg.name;
  for (const IonSpecies& s : species) sum.species.push_back(s.name);
  sum.initial_mass = masses(sim.state());
  sum.initial_charge = charge_weighted_mass(sim.state().conc, species);

  std::vector<std::size_t> probe_index;
  if (sim.membrane().size() > 0) {
    for (Point2 p : cfg.probes) {
      probe_index.push_back(sim.membrane().nearest(p));
      sum.probes.push_back(sim.membrane()[probe_index.back()].x);
    }
  }

  auto probes = io::open_output(out / "probes.csv");
  probes << "step,t";
  for (std::size_t i = 0; i < probe_index.size(); ++i) probes << ",phi_M_" << i;
  probes << '\n';
  auto iters = io::open_output(out / "iterations.csv");
  iters << "step,t,subsystem,iterations,residual,seconds\n";

  const long steps = static_cast<long>(std::llround(cfg.sim.t_end / cfg.sim.dt));
  long long cg_total = 0, gmres_total = 0, gmres_solves = 0;
  for (long n = 0; n < steps; ++n) {
    const StepReport rep = sim.step();
    const SimulationState& s = sim.state();
    sum.clamps += rep.clamps;
    if (cfg.clamp_limit >= 0 && sum.clamps > cfg.clamp_limit) {
      throw NumericalError("clamp count " + std::to_string(sum.clamps) + " exceeds the limit " +
                           std::to_string(cfg.clamp_limit) + " at step " + std::to_string(rep.step));
    }
    if (rep.clamps > 0 && log) *log << "warning: step " << rep.step << ": " << rep.clamps << " clamped evaluations\n";
    sum.max_electroneutrality_defect = std::max(sum.max_electroneutrality_defect, electroneutrality_defect(s.conc, species));
    if (observer) observer(sim, rep);

    probes << rep.step << ',' << rep.t;
    for (std::size_t i : probe_index) probes << ',' << s.membrane.phi_M[i];
    probes << '\n';
    iters << rep.step << ',' << rep.t << ",emi," << rep.emi.iterations << ',' << rep.emi.residual << ','
          << rep.emi.seconds << '\n';
    sum.max_cg_iterations = std::max(sum.max_cg_iterations, rep.emi.iterations);
    cg_total += rep.emi.iterations;
    for (const auto& [name, r] : rep.knp) {
      iters << rep.step << ',' << rep.t << ",knp_" << name << ',' << r.iterations << ',' << r.residual << ','
            << r.seconds << '\n';
      sum.max_gmres_iterations = std::max(sum.max_gmres_iterations, r.iterations);
      gmres_total += r.iterations;
      ++gmres_solves;
    }
    if (cfg.snapshot_every > 0 && rep.step % cfg.snapshot_every == 0) write_snapshot(out / "snapshots", sim);
    if (cfg.dump_matrices) write_matrices(out / "matrices", rep.step, sim.last_matrices());
    if (log && (rep.step % 100 == 0 || rep.step == steps)) {
      *log << "step " << rep.step << "/" << steps << "  t = " << rep.t << " s  cg " << rep.emi.iterations;
      if (!probe_index.empty()) *log << "  phi_M[0] = " << s.membrane.phi_M[probe_index[0]] << " V";
      *log << '\n';
    }
  }
  probes.flush();
  iters.flush();
  if (!probes || !iters) throw IoError("write failed in " + out.string());

  sum.steps = sim.state().step;
  sum.t_end = sim.state().t;
  sum.final_mass = masses(sim.state());
  sum.final_charge = charge_weighted_mass(sim.state().conc, species);
  sum.mean_cg_iterations = steps > 0 ? static_cast<double>(cg_total) / static_cast<double>(steps) : 0.0;
  sum.mean_gmres_iterations = gmres_solves > 0 ? static_cast<double>(gmres_total) / static_cast<double>(gmres_solves) : 0.0;
  for (std::size_t i : probe_index) sum.final_probe_phi_M.push_back(sim.state().membrane.phi_M[i]);
  sum.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  nlohmann::ordered_json j;
  j["scenario"] = sum.scenario;
  j["steps"] = sum.steps;
  j["t_end"] = sum.t_end;
  j["mesh"] = sim.mesh().description();
  j["wall_seconds"] = sum.wall_seconds;
  for (std::size_t k = 0; k < species.size(); ++k) {
    j["mass"][species[k].name] = {{"initial", sum.initial_mass[k]}, {"final", sum.final_mass[k]}};
  }
  j["charge"] = {{"initial", sum.initial_charge}, {"final", sum.final_charge}};
  j["max_electroneutrality_defect"] = sum.max_electroneutrality_defect;
  j["clamps"] = sum.clamps;
  j["iterations"] = {{"cg_max", sum.max_cg_iterations},
                     {"cg_mean", sum.mean_cg_iterations},
                     {"gmres_max", sum.max_gmres_iterations},
                     {"gmres_mean", sum.mean_gmres_iterations}};
  j["probes"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < sum.probes.size(); ++i) {
    j["probes"].push_back({{"x", sum.probes[i].x}, {"y", sum.probes[i].y}, {"final_phi_M", sum.final_probe_phi_M[i]}});
  }
  auto js = io::open_output(out / "summary.json");
  js << j.dump(2) << '\n';
  js.flush();
  if (!js) throw IoError("write failed: " + (out / "summary.json").string());
  return sum;
}

std::string run_report(const std::filesystem::path& dir) {
  const io::CsvTable it = io::read_csv(dir / "iterations.csv");
  const io::CsvTable pr = io::read_csv(dir / "probes.csv");
  const std::size_t c_sub = it.column("subsystem"), c_it = it.column("iterations"), c_sec = it.column("seconds");

  struct Stats {
    long solves = 0;
    long total = 0;
    int max = 0;
    double seconds = 0.0;
  };
  std::map<std::string, Stats> by;
  std::vector<std::string> order;
  for (const auto& row : it.rows) {
    auto [pos, inserted] = by.try_emplace(row[c_sub]);
    if (inserted) order.push_back(row[c_sub]);
    const int n = std::stoi(row[c_it]);
    pos->second.solves += 1;
    pos->second.total += n;
    pos->second.max = std::max(pos->second.max, n);
    pos->second.seconds += std::stod(row[c_sec]);
  }

  std::ostringstream os;
  os << std::left << std::setw(12) << "subsystem" << std::right << std::setw(8) << "solves" << std::setw(10) << "mean"
     << std::setw(8) << "max" << std::setw(12) << "seconds" << '\n';
  for (const std::string& name : order) {
    const Stats& s = by[name];
    os << std::left << std::setw(12) << name << std::right << std::setw(8) << s.solves << std::setw(10) << std::fixed
       << std::setprecision(2) << static_cast<double>(s.total) / static_cast<double>(s.solves) << std::setw(8) << s.max
       << std::setw(12) << std::setprecision(3) << s.seconds << '\n';
  }

  os << '\n' << std::left << std::setw(12) << "probe" << std::right << std::setw(12) << "min [mV]" << std::setw(12)
     << "max [mV]" << std::setw(12) << "final [mV]" << std::setw(14) << "0 V crossings" << '\n';
  for (std::size_t c = 2; c < pr.header.size(); ++c) {
    double lo = 0.0, hi = 0.0, last = 0.0;
    int crossings = 0;
    for (std::size_t r = 0; r < pr.rows.size(); ++r) {
      const double v = std::stod(pr.rows[r][c]);
      if (r == 0) lo = hi = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      if (r > 0 && last < 0.0 && v >= 0.0) ++crossings;
      last = v;
    }
    os << std::left << std::setw(12) << pr.header[c] << std::right << std::fixed << std::setprecision(2)
       << std::setw(12) << 1e3 * lo << std::setw(12) << 1e3 * hi << std::setw(12) << 1e3 * last << std::setw(14)
       << crossings << '\n';
  }
  os << '\n' << pr.rows.size() << " steps\n";
  return os.str();
}

}  // namespace knpemi
