#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "knpemi/io.hpp"
#include "knpemi/run.hpp"
#include "knpemi/verification.hpp"

namespace {

// Stable exit-code contract.
constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitConfig = 2;

struct Options {
  std::string config;
  std::string preset;
  std::string out;
  int threads = 0;
  bool dump_matrices = false;
  int degree = 1;
  std::optional<int> refine;
  std::string report_dir;
};

knpemi::ScenarioConfig scenario_from(const Options& o) {
  using namespace knpemi;
  ScenarioConfig cfg = preset(o.preset.empty() ? "model-b" : o.preset);
  if (!o.config.empty()) cfg = parse_config_file(o.config, cfg);
  if (o.refine) {
    if (*o.refine < 0) throw ConfigError("--refine must be nonnegative");
    for (int i = 0; i < *o.refine; ++i) cfg.sim.geometry = refine_uniform(cfg.sim.geometry);
  }
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.threads > 0) cfg.threads = o.threads;
  if (o.dump_matrices) cfg.dump_matrices = true;
  validate(cfg);
  return cfg;
}

void save_table(const Options& o, const knpemi::RateTable& t, const std::string& stem) {
  if (o.out.empty()) return;
  auto csv = knpemi::io::open_output(std::filesystem::path(o.out) / (stem + ".csv"));
  t.write_csv(csv);
  auto txt = knpemi::io::open_output(std::filesystem::path(o.out) / (stem + ".txt"));
  t.write_text(txt);
}

int mms_space(const Options& o) {
  using namespace knpemi;
  if (o.degree != 1 && o.degree != 2) throw ConfigError("--p must be 1 or 2");
  StudyOptions opts;
  opts.degree = o.degree;
  // --refine k: resolutions 16 ... 16 * 2^k
  const int levels = o.refine.value_or(o.degree == 1 ? 4 : 3);
  if (levels < 2 || levels > 6) throw ConfigError("--refine for mms-space must lie in [2, 6]");
  opts.resolutions.clear();
  for (int k = 0; k <= levels; ++k) opts.resolutions.push_back(16 << k);
  set_thread_count(o.threads > 0 ? o.threads : 1);
  const RateTable t = spatial_study(mms_spatial_problem(), opts);
  t.write_text(std::cout);
  std::cout << "wall time " << t.seconds << " s\n";
  save_table(o, t, "mms_space_p" + std::to_string(o.degree));
  const auto bands = spatial_bands(t, o.degree);
  write_bands(std::cout, bands);
  return all_pass(bands) ? kExitOk : kExitNumerical;
}

int mms_time(const Options& o) {
  using namespace knpemi;
  if (o.degree != 1) throw ConfigError("the temporal study uses p = 1");
  TemporalOptions opts;
  const int halvings = o.refine.value_or(6);
  if (halvings < 2 || halvings > 10) throw ConfigError("--refine for mms-time must lie in [2, 10]");
  opts.dts.clear();
  for (int k = 0; k <= halvings; ++k) opts.dts.push_back(5e-3 / static_cast<double>(1 << k));
  set_thread_count(o.threads > 0 ? o.threads : 1);
  const RateTable t = temporal_study(mms_temporal_problem(), opts);
  t.write_text(std::cout);
  std::cout << "wall time " << t.seconds << " s\n";
  save_table(o, t, "mms_time");
  const auto bands = temporal_bands(t);
  write_bands(std::cout, bands);
  return all_pass(bands) ? kExitOk : kExitNumerical;
}

int run(const Options& o) {
  using namespace knpemi;
  const ScenarioConfig cfg = scenario_from(o);
  std::cout << "scenario " << cfg.name << ": " << cfg.sim.geometry.nx << " x " << cfg.sim.geometry.ny << " cells, "
            << cfg.sim.t_end / cfg.sim.dt << " steps, output " << cfg.output_dir.string() << "\n";
  const RunSummary s = run_simulation(cfg, {}, &std::cout);
  std::cout << "finished " << s.steps << " steps in " << s.wall_seconds << " s\n";
  for (std::size_t i = 0; i < s.probes.size(); ++i) {
    std::cout << "probe " << i << " (" << s.probes[i].x << ", " << s.probes[i].y
              << ") m: final phi_M = " << 1e3 * s.final_probe_phi_M[i] << " mV\n";
  }
  std::cout << "max iterations: CG " << s.max_cg_iterations << ", GMRes " << s.max_gmres_iterations << "\n";
  std::cout << "clamped evaluations: " << s.clamps << "\n";
  return kExitOk;
}

int report(const Options& o) {
  const std::string dir = !o.report_dir.empty() ? o.report_dir : o.out;
  if (dir.empty()) throw knpemi::ConfigError("report needs a run directory (positional or --out)");
  std::cout << knpemi::run_report(dir);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-by-cell electrodiffusion (KNP-EMI) simulator with DG discretization"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--threads", o.threads, "Thread count for parallel kernels")->check(CLI::PositiveNumber);
  };

  CLI::App* space = app.add_subcommand("mms-space", "Spatial convergence study on the manufactured solution");
  add_common(space);
  space->add_option("--p", o.degree, "Polynomial degree (1 or 2)");
  space->add_option("--refine", o.refine, "Number of refinements above n = 16");

  CLI::App* time = app.add_subcommand("mms-time", "Temporal convergence study on the manufactured solution");
  add_common(time);
  time->add_option("--p", o.degree, "Polynomial degree (1)");
  time->add_option("--refine", o.refine, "Number of time-step halvings from 5 ms");

  CLI::App* runner = app.add_subcommand("run", "Run a scenario and write its artifacts");
  add_common(runner);
  runner->add_option("--config", o.config, "Scenario file applied on top of the preset")->check(CLI::ExistingFile);
  runner->add_option("--preset", o.preset, "Base preset: model-a or model-b (default model-b)");
  runner->add_flag("--dump-matrices", o.dump_matrices, "Write the assembled matrices of every step");
  runner->add_option("--refine", o.refine, "Uniform mesh refinements of the scenario");

  CLI::App* rep = app.add_subcommand("report", "Summarize iterations.csv and probes.csv of a run directory");
  rep->add_option("dir", o.report_dir, "Run directory");
  rep->add_option("--out", o.out, "Run directory (alternative to the positional argument)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (space->parsed()) return mms_space(o);
    if (time->parsed()) return mms_time(o);
    if (runner->parsed()) return run(o);
    if (rep->parsed()) return report(o);
  } catch (const knpemi::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const knpemi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
