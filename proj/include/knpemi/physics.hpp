#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "knpemi/dgspace.hpp"

namespace knpemi {

struct PhysicalConstants {
  double gas_constant = 8.314;     // J/(K mol)
  double temperature = 300.0;      // K
  double faraday = 9.648e4;        // C/mol
  double capacitance = 0.01;       // F/m^2

  /// F / (R T), 1/V.
  double psi() const { return faraday / (gas_constant * temperature); }
  friend bool operator==(const PhysicalConstants&, const PhysicalConstants&) = default;
};

struct IonSpecies {
  std::string name;
  int valence = 1;
  double diffusivity = 0.0;   // m^2/s
  double c_ics = 0.0;         // mol/m^3
  double c_ecs = 0.0;         // mol/m^3
  double g_leak = 0.0;        // S/m^2
  bool eliminated = false;
  friend bool operator==(const IonSpecies&, const IonSpecies&) = default;
};

/// Na+, K+, Cl- with the standard rest concentrations; Cl- is eliminated.
std::vector<IonSpecies> default_species();

/// Throws ConfigError unless exactly one species is eliminated, all D > 0 and z != 0.
void validate_species(std::span<const IonSpecies> species);
std::size_t eliminated_index(std::span<const IonSpecies> species);
/// Index of the species with the given name, or throws ConfigError.
std::size_t species_index(std::span<const IonSpecies> species, const std::string& name);

/// max over both compartments of |sum_k z_k c_k^0|.
double check_electroneutrality(std::span<const IonSpecies> species);

/// Coefficientwise c_m = -(1/z_m) sum_{k != m} z_k c_k. `solved` lists the
/// fields of the non-eliminated species in species order.
DgField recover_eliminated(std::span<const DgField> solved, std::span<const IonSpecies> species);

/// (RT/(zF)) ln(c_e/c_i). Throws DomainError for nonpositive concentrations.
double nernst_potential(double c_e, double c_i, int valence, const PhysicalConstants& consts);

/// D_k z_k^2 c_k / sum_l D_l z_l^2 c_l over all species. Throws DomainError
/// if the denominator is not positive.
double alpha_fraction(std::span<const double> concs, std::span<const IonSpecies> species, std::size_t k);

/// F psi sum_k z_k^2 D_k c_k over all species, S/m.
double conductivity_kappa(std::span<const double> concs, std::span<const IonSpecies> species,
                          const PhysicalConstants& consts);

/// Floor applied only inside logarithms and alpha fractions.
inline constexpr double kConcentrationFloor = 1e-12;

/// Counts how often a concentration had to be raised to the floor.
struct ClampCounter {
  long long count = 0;
  double clamp(double c) {
    if (c < kConcentrationFloor) {
      ++count;
      return kConcentrationFloor;
    }
    return c;
  }
};

/// Nernst potential with both concentrations floored.
double nernst_clamped(double c_e, double c_i, int valence, const PhysicalConstants& consts, ClampCounter& clamps);

/// Alpha fractions of all species with floored concentrations.
std::vector<double> alpha_fractions_clamped(std::span<const double> concs, std::span<const IonSpecies> species,
                                            ClampCounter& clamps);

/// Concentrations of every species on both sides of one membrane point.
/// Index 0 is the intracellular trace, 1 the extracellular one.
struct MembraneTrace {
  std::array<std::vector<double>, 2> conc;
};

/// Robin coefficients at a single membrane point. Indices over the side are
/// 0 = intracellular, 1 = extracellular; species indices cover all species
/// (entries of the eliminated species are unused).
struct InterfacePoint {
  double C = 0.0;                                 // C_M / dt
  std::array<double, 2> f{};                      // V
  std::vector<std::array<double, 2>> g;           // V
  std::vector<std::array<double, 2>> C_species;   // alpha C_M / (F z dt)
};

/// Interface data for every membrane quadrature point, ordered like
/// MembraneGeometry.
struct InterfaceData {
  std::vector<InterfacePoint> points;
};

/// Leak currents g_leak,k (phi_M - E_k), A/m^2.
std::vector<double> leak_currents(double phi_M, const MembraneTrace& trace, std::span<const IonSpecies> species,
                                  const PhysicalConstants& consts, ClampCounter& clamps);

/// Passive splitting: f = phi_M - dt I/C_M, g_k = phi_M - dt I_k/(C_M alpha_k).
InterfacePoint interface_data_passive(double phi_M, const MembraneTrace& trace, const PhysicalConstants& consts,
                                      double dt, std::span<const IonSpecies> species, ClampCounter& clamps);

/// Same as interface_data_passive with prescribed channel currents.
InterfacePoint interface_data_passive(double phi_M, std::span<const double> channel_currents,
                                      const MembraneTrace& trace, const PhysicalConstants& consts, double dt,
                                      std::span<const IonSpecies> species, ClampCounter& clamps);

/// Active splitting (after the ODE step): f = phi_M,
/// g_k = phi_M - dt I_k/(C_M alpha_k) + dt I/C_M.
InterfacePoint interface_data_active(double phi_M, std::span<const double> channel_currents,
                                     const MembraneTrace& trace, const PhysicalConstants& consts, double dt,
                                     std::span<const IonSpecies> species, ClampCounter& clamps);

}  // namespace knpemi
