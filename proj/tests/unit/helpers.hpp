#pragma once

#include <memory>
#include <random>
#include <vector>

#include "knpemi/dgspace.hpp"
#include "knpemi/emi_assembly.hpp"
#include "knpemi/mesh.hpp"

namespace knpemi::testing {

inline GeometrySpec unit_square(int n, bool with_cell = true) {
  GeometrySpec g;
  g.box = {0.0, 1.0, 0.0, 1.0};
  if (with_cell) g.ics = {{0.25, 0.75, 0.25, 0.75}};
  g.nx = g.ny = n;
  return g;
}

inline GeometrySpec axon_geometry(int nx = 124, int ny = 16) {
  GeometrySpec g;
  g.box = {0.0, 62e-6, 0.0, 4e-6};
  g.ics = {{1e-6, 61e-6, 1e-6, 3e-6}};
  g.nx = nx;
  g.ny = ny;
  return g;
}

inline std::shared_ptr<const Mesh2D> make_mesh(const GeometrySpec& g) {
  return std::make_shared<const Mesh2D>(build_structured_mesh(g));
}

inline std::shared_ptr<const DgSpace> make_space(const GeometrySpec& g, int degree) {
  return std::make_shared<const DgSpace>(make_mesh(g), degree);
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Everything assemble_emi reads, owned in one place.
struct EmiCase {
  std::shared_ptr<const DgSpace> space;
  std::unique_ptr<DgPattern> pattern;
  MembraneGeometry membrane;
  std::vector<IonSpecies> species = default_species();
  std::vector<DgField> concs;
  InterfaceData iface;

  EmiCase(std::shared_ptr<const DgSpace> s, std::vector<DgField> c) : space(std::move(s)), concs(std::move(c)) {
    pattern = std::make_unique<DgPattern>(*space);
    membrane = MembraneGeometry(*space);
    const auto traces = membrane_traces(membrane, *space, concs);
    ClampCounter clamps;
    for (const MembraneTrace& t : traces) {
      iface.points.push_back(interface_data_passive(-0.06774, t, PhysicalConstants{}, 1e-4, species, clamps));
    }
  }

  EmiSystem assemble(double beta) const {
    EmiInputs in;
    in.space = space.get();
    in.pattern = pattern.get();
    in.concs = concs;
    in.species = species;
    in.consts = PhysicalConstants{};
    in.membrane = &membrane;
    in.interface = &iface;
    in.penalty = beta;
    return assemble_emi(in);
  }
};

inline std::vector<DgField> rest_concentrations(const std::shared_ptr<const DgSpace>& space) {
  const double ics[] = {12.0, 125.0, 137.0}, ecs[] = {100.0, 4.0, 104.0};
  std::vector<DgField> c;
  for (int k = 0; k < 3; ++k) {
    c.push_back(interpolate(space, [&, k](Point2, int tag) { return tag == kEcsTag ? ecs[k] : ics[k]; }));
  }
  return c;
}

}  // namespace knpemi::testing
