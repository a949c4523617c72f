#pragma once

#include <functional>
#include <span>

#include "knpemi/dg_pattern.hpp"
#include "knpemi/membrane.hpp"
#include "knpemi/physics.hpp"

namespace knpemi {

/// Outward normal flux data on the outer boundary: (x, n, cell_tag) -> value.
using BoundaryFlux = std::function<double(Point2 x, Point2 n, int cell_tag)>;

struct EmiInputs {
  const DgSpace* space = nullptr;
  const DgPattern* pattern = nullptr;
  std::span<const DgField> concs;            // every species, eliminated one recovered
  std::span<const IonSpecies> species;
  PhysicalConstants consts;
  const MembraneGeometry* membrane = nullptr;
  const InterfaceData* interface = nullptr;
  double penalty = 0.0;                      // beta
  PointFunction volume_source;               // optional: integral of s w added to the rhs
  BoundaryFlux exterior_current;             // optional: current density i.n on the outer boundary
};

struct EmiSystem {
  SparseSystem system;  // nullspace = constant vector
  double penalty = 0.0;
};

/// Symmetric interior penalty discretization of the potential equation with
/// Robin coupling C [phi][w] on membrane facets.
EmiSystem assemble_emi(const EmiInputs& in);

/// Block-diagonal DG mass matrix in the given pattern.
CsrMatrix assemble_mass(const DgSpace& space, const DgPattern& pattern);

/// Minimum of x^T A x / x^T x over `trials` pseudo-random vectors, each made
/// orthogonal to `nullspace` when given. Seeded, hence deterministic.
double rayleigh_probe(const CsrMatrix& a, int trials, std::span<const double> nullspace = {},
                      unsigned seed = 12345u);

/// Volume-averaged conductivity.
double mean_conductivity(const DgSpace& space, std::span<const DgField> concs, std::span<const IonSpecies> species,
                         const PhysicalConstants& consts);

/// Default penalty 20 * d * p with d = 2.
inline double default_penalty(int degree) { return 20.0 * 2.0 * degree; }

}  // namespace knpemi
