#include "knpemi/scenario.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace knpemi {

namespace {

constexpr double kMicro = 1e-6;

const std::map<std::string, std::map<std::string, double>>& unit_table() {
  static const std::map<std::string, std::map<std::string, double>> table = {
      {"length", {{"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"µm", 1e-6}, {"nm", 1e-9}}},
      {"time", {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"µs", 1e-6}}},
      {"concentration", {{"mM", 1.0}, {"mol/m3", 1.0}, {"M", 1e3}, {"uM", 1e-3}}},
      {"voltage", {{"V", 1.0}, {"mV", 1e-3}}},
      {"conductance", {{"S/m2", 1.0}, {"mS/cm2", 10.0}}},
      {"capacitance", {{"F/m2", 1.0}, {"uF/cm2", 1e-2}}},
      {"diffusivity", {{"m2/s", 1.0}, {"cm2/s", 1e-4}}},
      {"temperature", {{"K", 1.0}}},
      {"gas_constant", {{"J/(K mol)", 1.0}, {"J/K/mol", 1.0}}},
      {"faraday", {{"C/mol", 1.0}}},
      {"dimensionless", {}},
  };
  return table;
}

const std::string& si_unit(const std::string& dimension) {
  static const std::map<std::string, std::string> si = {
      {"length", "m"},         {"time", "s"},           {"concentration", "mM"}, {"voltage", "V"},
      {"conductance", "S/m2"}, {"capacitance", "F/m2"}, {"diffusivity", "m2/s"}, {"temperature", "K"},
      {"gas_constant", "J/K/mol"}, {"faraday", "C/mol"}, {"dimensionless", ""},
  };
  return si.at(dimension);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/// One `key = value` line being applied.
struct Entry {
  std::string source;
  int line = 0;
  std::string section;
  std::string key;
  std::string value;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(source + ":" + std::to_string(line) + ": [" + section + "] " + key + ": " + what);
  }

  /// k numbers sharing one optional trailing unit.
  std::vector<double> numbers(std::size_t k, const std::string& dimension) const {
    std::vector<std::string> t = tokens(value);
    std::string unit;
    if (t.size() > k) {
      for (std::size_t i = k; i < t.size(); ++i) unit += (i > k ? " " : "") + t[i];
      t.resize(k);
    }
    if (t.size() != k) fail("expected " + std::to_string(k) + " value(s), got '" + value + "'");
    std::vector<double> out;
    try {
      for (const std::string& n : t) out.push_back(parse_quantity(n, unit, dimension));
    } catch (const ConfigError& e) {
      fail(e.what());
    }
    return out;
  }
  double number(const std::string& dimension) const { return numbers(1, dimension)[0]; }
  double positive(const std::string& dimension) const {
    const double v = number(dimension);
    if (!(v > 0.0)) fail("must be positive");
    return v;
  }
  double nonnegative(const std::string& dimension) const {
    const double v = number(dimension);
    if (!(v >= 0.0)) fail("must be nonnegative");
    return v;
  }
  /// "auto" maps to 0, the library's select-default sentinel.
  double positive_or_auto(const std::string& dimension) const {
    return trim(value) == "auto" ? 0.0 : positive(dimension);
  }
  long long integer() const {
    const std::string v = trim(value);
    char* end = nullptr;
    errno = 0;
    const long long out = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || *end != '\0' || errno != 0) fail("expected an integer, got '" + value + "'");
    return out;
  }
  int positive_int() const {
    const long long v = integer();
    if (v < 1 || v > 1'000'000'000) fail("must be a positive integer");
    return static_cast<int>(v);
  }
  bool boolean() const {
    const std::string v = trim(value);
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    fail("expected true or false, got '" + value + "'");
  }
};

IonSpecies species_template(const std::string& name, const std::vector<IonSpecies>& base) {
  for (const IonSpecies& s : base) {
    if (s.name == name) return s;
  }
  for (const IonSpecies& s : default_species()) {
    if (s.name == name) return s;
  }
  IonSpecies s;
  s.name = name;
  s.diffusivity = 0.0;
  return s;
}

AmgSmoother parse_smoother(const Entry& e) {
  const std::string v = trim(e.value);
  if (v == "jacobi") return AmgSmoother::Jacobi;
  if (v == "gauss-seidel") return AmgSmoother::GaussSeidel;
  if (v == "block-jacobi") return AmgSmoother::BlockJacobi;
  e.fail("expected jacobi, gauss-seidel or block-jacobi");
}

const char* smoother_key(AmgSmoother s) {
  switch (s) {
    case AmgSmoother::Jacobi: return "jacobi";
    case AmgSmoother::GaussSeidel: return "gauss-seidel";
    case AmgSmoother::BlockJacobi: return "block-jacobi";
  }
  return "jacobi";
}

class Parser {
 public:
  Parser(ScenarioConfig base, std::string source) : cfg_(std::move(base)), source_(std::move(source)) {}

  ScenarioConfig run(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    std::string section;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string line = trim(raw.substr(0, raw.find('#')));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(source_ + ":" + std::to_string(line_no) + ": unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        open_section(section, line_no);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(source_ + ":" + std::to_string(line_no) + ": expected 'key = value', got '" + line + "'");
      }
      Entry e{source_, line_no, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
      if (section.empty()) e.fail("key outside of a section");
      if (e.value.empty()) e.fail("missing value");
      apply(e);
    }
    return cfg_;
  }

 private:
  void open_section(const std::string& section, int line_no) {
    static const std::set<std::string> known = {"scenario", "geometry", "constants", "membrane", "stimulus",
                                                "time",     "discretization", "solver", "ode", "output"};
    if (section.rfind("species.", 0) == 0) {
      const std::string name = trim(section.substr(8));
      if (name.empty()) throw ConfigError(source_ + ":" + std::to_string(line_no) + ": species section without a name");
      if (!species_seen_) {
        base_species_ = cfg_.sim.species;
        cfg_.sim.species.clear();
        species_seen_ = true;
      }
      for (const IonSpecies& s : cfg_.sim.species) {
        if (s.name == name) throw ConfigError(source_ + ":" + std::to_string(line_no) + ": duplicate species " + name);
      }
      cfg_.sim.species.push_back(species_template(name, base_species_));
      return;
    }
    if (!known.contains(section)) {
      throw ConfigError(source_ + ":" + std::to_string(line_no) + ": unknown section [" + section + "]");
    }
  }

  void apply(const Entry& e) {
    const std::string id = e.section + "." + e.key;
    const bool repeatable = id == "geometry.ics" || id == "output.probe";
    if (!repeatable && !seen_.insert(id).second) e.fail("duplicate key");

    SimulationConfig& s = cfg_.sim;
    if (e.section.rfind("species.", 0) == 0) return apply_species(e, s.species.back());

    static const std::map<std::string, std::function<void(Parser&, const Entry&)>> handlers = {
        {"scenario.name", [](Parser& p, const Entry& e) { p.cfg_.name = e.value; }},
        {"geometry.box", [](Parser& p, const Entry& e) { p.cfg_.sim.geometry.box = rect(e); }},
        {"geometry.ics",
         [](Parser& p, const Entry& e) {
           if (!p.ics_seen_) p.cfg_.sim.geometry.ics.clear();
           p.ics_seen_ = true;
           p.cfg_.sim.geometry.ics.push_back(rect(e));
         }},
        {"geometry.nx", [](Parser& p, const Entry& e) { p.cfg_.sim.geometry.nx = e.positive_int(); }},
        {"geometry.ny", [](Parser& p, const Entry& e) { p.cfg_.sim.geometry.ny = e.positive_int(); }},
        {"constants.gas_constant", [](Parser& p, const Entry& e) { p.cfg_.sim.consts.gas_constant = e.positive("gas_constant"); }},
        {"constants.temperature", [](Parser& p, const Entry& e) { p.cfg_.sim.consts.temperature = e.positive("temperature"); }},
        {"constants.faraday", [](Parser& p, const Entry& e) { p.cfg_.sim.consts.faraday = e.positive("faraday"); }},
        {"constants.capacitance", [](Parser& p, const Entry& e) { p.cfg_.sim.consts.capacitance = e.positive("capacitance"); }},
        {"membrane.model",
         [](Parser& p, const Entry& e) {
           const std::string v = trim(e.value);
           if (v == "passive") {
             p.cfg_.sim.membrane.model = MembraneModel::Passive;
           } else if (v == "hodgkin-huxley") {
             p.cfg_.sim.membrane.model = MembraneModel::HodgkinHuxley;
           } else {
             e.fail("expected passive or hodgkin-huxley");
           }
         }},
        {"membrane.g_Na", [](Parser& p, const Entry& e) { p.cfg_.sim.membrane.hh.g_Na = e.nonnegative("conductance"); }},
        {"membrane.g_K", [](Parser& p, const Entry& e) { p.cfg_.sim.membrane.hh.g_K = e.nonnegative("conductance"); }},
        {"membrane.v_rest", [](Parser& p, const Entry& e) { p.cfg_.sim.membrane.hh.v_rest = e.number("voltage"); }},
        {"membrane.phi_M0", [](Parser& p, const Entry& e) { p.cfg_.sim.phi_M0 = e.number("voltage"); }},
        {"stimulus.enabled", [](Parser& p, const Entry& e) { p.cfg_.sim.membrane.stimulus.enabled = e.boolean(); }},
        {"stimulus.g_syn", [](Parser& p, const Entry& e) { p.cfg_.sim.membrane.stimulus.g_syn = e.nonnegative("conductance"); }},
        {"stimulus.tau", [](Parser& p, const Entry& e) { p.cfg_.sim.membrane.stimulus.tau = e.positive("time"); }},
        {"stimulus.period", [](Parser& p, const Entry& e) { p.cfg_.sim.membrane.stimulus.period = e.positive("time"); }},
        {"stimulus.x_max", [](Parser& p, const Entry& e) { p.cfg_.sim.membrane.stimulus.x_max = e.number("length"); }},
        {"time.dt", [](Parser& p, const Entry& e) { p.cfg_.sim.dt = e.positive("time"); }},
        {"time.dt_ode", [](Parser& p, const Entry& e) { p.cfg_.sim.dt_ode = e.positive("time"); }},
        {"time.t_end", [](Parser& p, const Entry& e) { p.cfg_.sim.t_end = e.nonnegative("time"); }},
        {"discretization.degree",
         [](Parser& p, const Entry& e) {
           const long long d = e.integer();
           if (d != 1 && d != 2) e.fail("degree must be 1 or 2");
           p.cfg_.sim.degree = static_cast<int>(d);
         }},
        {"discretization.beta", [](Parser& p, const Entry& e) { p.cfg_.sim.beta = e.positive_or_auto("dimensionless"); }},
        {"discretization.gamma", [](Parser& p, const Entry& e) { p.cfg_.sim.gamma = e.positive_or_auto("dimensionless"); }},
        {"solver.cg_rtol", [](Parser& p, const Entry& e) { p.cfg_.sim.solver.cg.rtol = e.positive("dimensionless"); }},
        {"solver.cg_max_iterations", [](Parser& p, const Entry& e) { p.cfg_.sim.solver.cg.max_iterations = e.positive_int(); }},
        {"solver.gmres_rtol", [](Parser& p, const Entry& e) { p.cfg_.sim.solver.gmres.rtol = e.positive("dimensionless"); }},
        {"solver.gmres_max_iterations", [](Parser& p, const Entry& e) { p.cfg_.sim.solver.gmres.max_iterations = e.positive_int(); }},
        {"solver.gmres_restart", [](Parser& p, const Entry& e) { p.cfg_.sim.solver.gmres.restart = e.positive_int(); }},
        {"solver.amg_strength_threshold",
         [](Parser& p, const Entry& e) { p.cfg_.sim.solver.amg.strength_threshold = e.nonnegative("dimensionless"); }},
        {"solver.amg_fine_threshold",
         [](Parser& p, const Entry& e) { p.cfg_.sim.solver.amg.fine_threshold = e.number("dimensionless"); }},
        {"solver.amg_max_levels", [](Parser& p, const Entry& e) { p.cfg_.sim.solver.amg.max_levels = e.positive_int(); }},
        {"solver.amg_coarse_size", [](Parser& p, const Entry& e) { p.cfg_.sim.solver.amg.coarse_size = e.positive_int(); }},
        {"solver.amg_pre_sweeps", [](Parser& p, const Entry& e) { p.cfg_.sim.solver.amg.pre_sweeps = e.positive_int(); }},
        {"solver.amg_post_sweeps", [](Parser& p, const Entry& e) { p.cfg_.sim.solver.amg.post_sweeps = e.positive_int(); }},
        {"solver.amg_smoother", [](Parser& p, const Entry& e) { p.cfg_.sim.solver.amg.smoother = parse_smoother(e); }},
        {"solver.amg_block_size", [](Parser& p, const Entry& e) { p.cfg_.sim.solver.amg.block_size = e.positive_int(); }},
        {"solver.emi_shift", [](Parser& p, const Entry& e) { p.cfg_.sim.solver.emi_shift = e.positive_or_auto("dimensionless"); }},
        {"solver.freeze_hierarchy", [](Parser& p, const Entry& e) { p.cfg_.sim.solver.freeze_hierarchy = e.boolean(); }},
        {"ode.rtol", [](Parser& p, const Entry& e) { p.cfg_.sim.ode.rtol = e.positive("dimensionless"); }},
        {"ode.atol_voltage", [](Parser& p, const Entry& e) { p.cfg_.sim.ode.atol_voltage = e.positive("voltage"); }},
        {"ode.atol_gate", [](Parser& p, const Entry& e) { p.cfg_.sim.ode.atol_gate = e.positive("dimensionless"); }},
        {"ode.min_step", [](Parser& p, const Entry& e) { p.cfg_.sim.ode.min_step = e.positive("time"); }},
        {"output.directory", [](Parser& p, const Entry& e) { p.cfg_.output_dir = e.value; }},
        {"output.snapshot_every",
         [](Parser& p, const Entry& e) {
           const long long v = e.integer();
           if (v < 0) e.fail("must be nonnegative");
           p.cfg_.snapshot_every = static_cast<int>(v);
         }},
        {"output.probe",
         [](Parser& p, const Entry& e) {
           if (!p.probes_seen_) p.cfg_.probes.clear();
           p.probes_seen_ = true;
           if (trim(e.value) == "none") return;
           const auto v = e.numbers(2, "length");
           p.cfg_.probes.push_back({v[0], v[1]});
         }},
        {"output.threads", [](Parser& p, const Entry& e) { p.cfg_.threads = e.positive_int(); }},
        {"output.dump_matrices", [](Parser& p, const Entry& e) { p.cfg_.dump_matrices = e.boolean(); }},
        {"output.clamp_limit", [](Parser& p, const Entry& e) { p.cfg_.clamp_limit = e.integer(); }},
    };
    const auto it = handlers.find(id);
    if (it == handlers.end()) e.fail("unknown key");
    it->second(*this, e);
  }

  static void apply_species(const Entry& e, IonSpecies& sp) {
    if (e.key == "valence") {
      const long long z = e.integer();
      if (z == 0 || z < -10 || z > 10) e.fail("valence must be a nonzero integer");
      sp.valence = static_cast<int>(z);
    } else if (e.key == "diffusivity") {
      sp.diffusivity = e.positive("diffusivity");
    } else if (e.key == "c_ics") {
      sp.c_ics = e.positive("concentration");
    } else if (e.key == "c_ecs") {
      sp.c_ecs = e.positive("concentration");
    } else if (e.key == "g_leak") {
      sp.g_leak = e.nonnegative("conductance");
    } else if (e.key == "eliminated") {
      sp.eliminated = e.boolean();
    } else {
      e.fail("unknown key");
    }
  }

  static Rect rect(const Entry& e) {
    const auto v = e.numbers(4, "length");
    if (!(v[1] > v[0]) || !(v[3] > v[2])) e.fail("expected x0 x1 y0 y1 with x0 < x1 and y0 < y1");
    return {v[0], v[1], v[2], v[3]};
  }

  ScenarioConfig cfg_;
  std::string source_;
  std::set<std::string> seen_;
  std::vector<IonSpecies> base_species_;
  bool species_seen_ = false;
  bool ics_seen_ = false;
  bool probes_seen_ = false;
};

ScenarioConfig model_a() {
  ScenarioConfig c;
  c.name = "model-a";
  c.sim.geometry.box = {0.0, 1.0, 0.0, 1.0};
  c.sim.geometry.ics = {{0.25, 0.75, 0.25, 0.75}};
  c.sim.geometry.nx = 16;
  c.sim.geometry.ny = 16;
  c.sim.membrane.model = MembraneModel::Passive;
  c.sim.membrane.stimulus.enabled = false;
  c.sim.t_end = 1e-3;
  c.probes = {{0.25, 0.5}};
  c.output_dir = "out/model-a";
  return c;
}

ScenarioConfig model_b() {
  ScenarioConfig c;
  c.name = "model-b";
  c.sim.geometry.box = {0.0, 62 * kMicro, 0.0, 4 * kMicro};
  c.sim.geometry.ics = {{1 * kMicro, 61 * kMicro, 1 * kMicro, 3 * kMicro}};
  c.sim.geometry.nx = 124;
  c.sim.geometry.ny = 16;
  c.sim.membrane.model = MembraneModel::HodgkinHuxley;
  c.sim.membrane.stimulus = StimulusSpec{};
  c.sim.membrane.stimulus.x_max = 1 * kMicro;
  c.sim.t_end = 0.1;
  c.probes = {{25 * kMicro, 1 * kMicro}};
  c.output_dir = "out/model-b";
  return c;
}

}  // namespace

double parse_quantity(const std::string& number, const std::string& unit, const std::string& dimension) {
  const auto dim = unit_table().find(dimension);
  if (dim == unit_table().end()) throw ConfigError("unknown dimension " + dimension);
  char* end = nullptr;
  const double v = std::strtod(number.c_str(), &end);
  if (number.empty() || *end != '\0' || !std::isfinite(v)) throw ConfigError("not a finite number: '" + number + "'");
  const std::string u = trim(unit);
  if (u.empty()) return v;
  const auto it = dim->second.find(u);
  if (it == dim->second.end()) {
    std::string allowed;
    for (const auto& [name, scale] : dim->second) allowed += (allowed.empty() ? "" : ", ") + name;
    throw ConfigError("unit '" + u + "' is not a " + dimension + " unit" +
                      (allowed.empty() ? " (dimensionless)" : " (allowed: " + allowed + ")"));
  }
  return v * it->second;
}

void validate(const ScenarioConfig& cfg) {
  validate(cfg.sim);
  const Rect& box = cfg.sim.geometry.box;
  const double tol = 1e-12 * std::max(box.width(), box.height());
  for (Point2 p : cfg.probes) {
    if (p.x < box.x0 - tol || p.x > box.x1 + tol || p.y < box.y0 - tol || p.y > box.y1 + tol) {
      throw ConfigError("probe (" + fmt(p.x) + ", " + fmt(p.y) + ") lies outside the domain");
    }
  }
  if (cfg.snapshot_every < 0) throw ConfigError("snapshot cadence must be nonnegative");
  if (cfg.threads < 1) throw ConfigError("thread count must be positive");
  if (cfg.output_dir.empty()) throw ConfigError("output directory must not be empty");
}

std::vector<std::string> preset_names() { return {"model-a", "model-b"}; }

ScenarioConfig preset(const std::string& name) {
  if (name == "model-a") return model_a();
  if (name == "model-b") return model_b();
  std::string known;
  for (const std::string& n : preset_names()) known += " " + n;
  throw ConfigError("unknown preset '" + name + "' (known:" + known + ")");
}

ScenarioConfig parse_config(const std::string& text, const std::string& source, const ScenarioConfig& base) {
  ScenarioConfig cfg = Parser(base, source).run(text);
  validate(cfg);
  return cfg;
}

ScenarioConfig parse_config_file(const std::filesystem::path& path, const ScenarioConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string(), base);
}

std::string format_config(const ScenarioConfig& cfg) {
  const SimulationConfig& s = cfg.sim;
  std::ostringstream os;
  auto q = [](double v, const std::string& dim) {
    const std::string& u = si_unit(dim);
    return u.empty() ? fmt(v) : fmt(v) + " " + u;
  };
  auto rect = [](const Rect& r) { return fmt(r.x0) + " " + fmt(r.x1) + " " + fmt(r.y0) + " " + fmt(r.y1) + " m"; };
  auto flag = [](bool b) { return b ? "true" : "false"; };
  auto or_auto = [](double v) { return v > 0.0 ? fmt(v) : std::string("auto"); };

  os << "[scenario]\nname = " << cfg.name << "\n\n";
  os << "[geometry]\nbox = " << rect(s.geometry.box) << '\n';
  for (const Rect& r : s.geometry.ics) os << "ics = " << rect(r) << '\n';
  os << "nx = " << s.geometry.nx << "\nny = " << s.geometry.ny << "\n\n";
  for (const IonSpecies& sp : s.species) {
    os << "[species." << sp.name << "]\n"
       << "valence = " << sp.valence << '\n'
       << "diffusivity = " << q(sp.diffusivity, "diffusivity") << '\n'
       << "c_ics = " << q(sp.c_ics, "concentration") << '\n'
       << "c_ecs = " << q(sp.c_ecs, "concentration") << '\n'
       << "g_leak = " << q(sp.g_leak, "conductance") << '\n'
       << "eliminated = " << flag(sp.eliminated) << "\n\n";
  }
  os << "[constants]\n"
     << "gas_constant = " << q(s.consts.gas_constant, "gas_constant") << '\n'
     << "temperature = " << q(s.consts.temperature, "temperature") << '\n'
     << "faraday = " << q(s.consts.faraday, "faraday") << '\n'
     << "capacitance = " << q(s.consts.capacitance, "capacitance") << "\n\n";
  os << "[membrane]\nmodel = " << (s.membrane.model == MembraneModel::Passive ? "passive" : "hodgkin-huxley") << '\n'
     << "g_Na = " << q(s.membrane.hh.g_Na, "conductance") << '\n'
     << "g_K = " << q(s.membrane.hh.g_K, "conductance") << '\n'
     << "v_rest = " << q(s.membrane.hh.v_rest, "voltage") << '\n'
     << "phi_M0 = " << q(s.phi_M0, "voltage") << "\n\n";
  const StimulusSpec& st = s.membrane.stimulus;
  os << "[stimulus]\nenabled = " << flag(st.enabled) << '\n'
     << "g_syn = " << q(st.g_syn, "conductance") << '\n'
     << "tau = " << q(st.tau, "time") << '\n'
     << "period = " << q(st.period, "time") << '\n'
     << "x_max = " << q(st.x_max, "length") << "\n\n";
  os << "[time]\ndt = " << q(s.dt, "time") << "\ndt_ode = " << q(s.dt_ode, "time") << "\nt_end = " << q(s.t_end, "time")
     << "\n\n";
  os << "[discretization]\ndegree = " << s.degree << "\nbeta = " << or_auto(s.beta) << "\ngamma = " << or_auto(s.gamma)
     << "\n\n";
  const SolverSettings& so = s.solver;
  os << "[solver]\n"
     << "cg_rtol = " << fmt(so.cg.rtol) << "\ncg_max_iterations = " << so.cg.max_iterations << '\n'
     << "gmres_rtol = " << fmt(so.gmres.rtol) << "\ngmres_max_iterations = " << so.gmres.max_iterations << '\n'
     << "gmres_restart = " << so.gmres.restart << '\n'
     << "amg_strength_threshold = " << fmt(so.amg.strength_threshold) << '\n'
     << "amg_fine_threshold = " << fmt(so.amg.fine_threshold) << '\n'
     << "amg_max_levels = " << so.amg.max_levels << "\namg_coarse_size = " << so.amg.coarse_size << '\n'
     << "amg_pre_sweeps = " << so.amg.pre_sweeps << "\namg_post_sweeps = " << so.amg.post_sweeps << '\n'
     << "amg_smoother = " << smoother_key(so.amg.smoother) << "\namg_block_size = " << so.amg.block_size << '\n'
     << "emi_shift = " << or_auto(so.emi_shift) << "\nfreeze_hierarchy = " << flag(so.freeze_hierarchy) << "\n\n";
  os << "[ode]\nrtol = " << fmt(s.ode.rtol) << "\natol_voltage = " << q(s.ode.atol_voltage, "voltage")
     << "\natol_gate = " << fmt(s.ode.atol_gate) << "\nmin_step = " << q(s.ode.min_step, "time") << "\n\n";
  os << "[output]\ndirectory = " << cfg.output_dir.string() << "\nsnapshot_every = " << cfg.snapshot_every << '\n';
  if (cfg.probes.empty()) os << "probe = none\n";
  for (Point2 p : cfg.probes) os << "probe = " << fmt(p.x) << ' ' << fmt(p.y) << " m\n";
  os << "threads = " << cfg.threads << "\ndump_matrices = " << flag(cfg.dump_matrices)
     << "\nclamp_limit = " << cfg.clamp_limit << '\n';
  return os.str();
}

}  // namespace knpemi
