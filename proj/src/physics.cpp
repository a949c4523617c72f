#include "knpemi/physics.hpp"

#include <cmath>
#include <numeric>

namespace knpemi {

std::vector<IonSpecies> default_species() {
  return {
      {"Na", 1, 1.33e-9, 12.0, 100.0, 1.0, false},
      {"K", 1, 1.96e-9, 125.0, 4.0, 4.0, false},
      {"Cl", -1, 2.03e-9, 137.0, 104.0, 0.0, true},
  };
}

void validate_species(std::span<const IonSpecies> species) {
  if (species.empty()) throw ConfigError("species: at least one ion species required");
  int eliminated = 0;
  for (const IonSpecies& s : species) {
    if (s.valence == 0) throw ConfigError("species " + s.name + ": valence must be nonzero");
    if (!(s.diffusivity > 0.0)) throw ConfigError("species " + s.name + ": diffusivity must be positive");
    if (s.g_leak < 0.0) throw ConfigError("species " + s.name + ": leak conductance must be nonnegative");
    if (s.eliminated) ++eliminated;
  }
  if (eliminated != 1) throw ConfigError("species: exactly one species must be eliminated");
}

std::size_t eliminated_index(std::span<const IonSpecies> species) {
  for (std::size_t k = 0; k < species.size(); ++k) {
    if (species[k].eliminated) return k;
  }
  throw ConfigError("species: no eliminated species");
}

std::size_t species_index(std::span<const IonSpecies> species, const std::string& name) {
  for (std::size_t k = 0; k < species.size(); ++k) {
    if (species[k].name == name) return k;
  }
  throw ConfigError("species: no species named '" + name + "'");
}

double check_electroneutrality(std::span<const IonSpecies> species) {
  double ics = 0.0, ecs = 0.0;
  for (const IonSpecies& s : species) {
    ics += s.valence * s.c_ics;
    ecs += s.valence * s.c_ecs;
  }
  return std::max(std::abs(ics), std::abs(ecs));
}

DgField recover_eliminated(std::span<const DgField> solved, std::span<const IonSpecies> species) {
  const std::size_t m = eliminated_index(species);
  if (solved.size() + 1 != species.size()) {
    throw ConfigError("recover_eliminated: expected one field per non-eliminated species");
  }
  DgField out(solved.front().space_ptr());
  std::vector<double>& c = out.data();
  const double inv = -1.0 / species[m].valence;
  std::size_t j = 0;
  for (std::size_t k = 0; k < species.size(); ++k) {
    if (k == m) continue;
    const double w = species[k].valence * inv;
    const std::vector<double>& src = solved[j++].data();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += w * src[i];
  }
  return out;
}

double nernst_potential(double c_e, double c_i, int valence, const PhysicalConstants& consts) {
  if (!(c_e > 0.0) || !(c_i > 0.0)) {
    throw DomainError("Nernst potential of a nonpositive concentration (c_e=" + std::to_string(c_e) +
                      ", c_i=" + std::to_string(c_i) + ")");
  }
  return std::log(c_e / c_i) / (valence * consts.psi());
}

double alpha_fraction(std::span<const double> concs, std::span<const IonSpecies> species, std::size_t k) {
  double total = 0.0;
  for (std::size_t l = 0; l < species.size(); ++l) {
    const double z = species[l].valence;
    total += species[l].diffusivity * z * z * concs[l];
  }
  if (!(total > 0.0)) throw DomainError("alpha fraction: total weighted concentration is not positive");
  const double z = species[k].valence;
  return species[k].diffusivity * z * z * concs[k] / total;
}

double conductivity_kappa(std::span<const double> concs, std::span<const IonSpecies> species,
                          const PhysicalConstants& consts) {
  double sum = 0.0;
  for (std::size_t l = 0; l < species.size(); ++l) {
    const double z = species[l].valence;
    sum += z * z * species[l].diffusivity * concs[l];
  }
  return consts.faraday * consts.psi() * sum;
}

double nernst_clamped(double c_e, double c_i, int valence, const PhysicalConstants& consts, ClampCounter& clamps) {
  return nernst_potential(clamps.clamp(c_e), clamps.clamp(c_i), valence, consts);
}

std::vector<double> alpha_fractions_clamped(std::span<const double> concs, std::span<const IonSpecies> species,
                                            ClampCounter& clamps) {
  std::vector<double> c(concs.begin(), concs.end());
  for (double& v : c) v = clamps.clamp(v);
  std::vector<double> alpha(species.size());
  for (std::size_t k = 0; k < species.size(); ++k) alpha[k] = alpha_fraction(c, species, k);
  return alpha;
}

std::vector<double> leak_currents(double phi_M, const MembraneTrace& trace, std::span<const IonSpecies> species,
                                  const PhysicalConstants& consts, ClampCounter& clamps) {
  std::vector<double> current(species.size(), 0.0);
  for (std::size_t k = 0; k < species.size(); ++k) {
    if (species[k].g_leak == 0.0) continue;
    const double E = nernst_clamped(trace.conc[1][k], trace.conc[0][k], species[k].valence, consts, clamps);
    current[k] = species[k].g_leak * (phi_M - E);
  }
  return current;
}

namespace {

InterfacePoint build_point(double phi_M, std::span<const double> currents, const MembraneTrace& trace,
                           const PhysicalConstants& consts, double dt, std::span<const IonSpecies> species,
                           ClampCounter& clamps, bool active) {
  if (!(dt > 0.0)) throw ConfigError("interface data: time step must be positive");
  const double total = std::accumulate(currents.begin(), currents.end(), 0.0);
  const double cm = consts.capacitance;
  InterfacePoint p;
  p.C = cm / dt;
  const double f = active ? phi_M : phi_M - dt * total / cm;
  p.f = {f, f};
  p.g.resize(species.size());
  p.C_species.resize(species.size());
  for (int side = 0; side < 2; ++side) {
    const std::vector<double> alpha = alpha_fractions_clamped(trace.conc[side], species, clamps);
    for (std::size_t k = 0; k < species.size(); ++k) {
      double g = phi_M - dt * currents[k] / (cm * alpha[k]);
      if (active) g += dt * total / cm;
      p.g[k][side] = g;
      p.C_species[k][side] = alpha[k] * cm / (consts.faraday * species[k].valence * dt);
    }
  }
  return p;
}

}  // namespace

InterfacePoint interface_data_passive(double phi_M, const MembraneTrace& trace, const PhysicalConstants& consts,
                                      double dt, std::span<const IonSpecies> species, ClampCounter& clamps) {
  const std::vector<double> currents = leak_currents(phi_M, trace, species, consts, clamps);
  return build_point(phi_M, currents, trace, consts, dt, species, clamps, false);
}

InterfacePoint interface_data_passive(double phi_M, std::span<const double> channel_currents,
                                      const MembraneTrace& trace, const PhysicalConstants& consts, double dt,
                                      std::span<const IonSpecies> species, ClampCounter& clamps) {
  return build_point(phi_M, channel_currents, trace, consts, dt, species, clamps, false);
}

InterfacePoint interface_data_active(double phi_M, std::span<const double> channel_currents,
                                     const MembraneTrace& trace, const PhysicalConstants& consts, double dt,
                                     std::span<const IonSpecies> species, ClampCounter& clamps) {
  return build_point(phi_M, channel_currents, trace, consts, dt, species, clamps, true);
}

}  // namespace knpemi
