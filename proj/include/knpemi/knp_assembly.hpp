#pragma once

#include <span>
#include <vector>

#include "knpemi/emi_assembly.hpp"

namespace knpemi {

/// Potential gradients at volume and facet quadrature points.
struct DriftField {
  int volume_points = 0;
  int facet_points = 0;
  std::vector<Point2> cell_grad;                 // [cell * volume_points + q]
  std::vector<std::array<double, 2>> facet_dn;   // [facet * facet_points + q], one-sided grad(phi).n
};

DriftField drift_field(const DgField& phi);

struct KnpInputs {
  const DgSpace* space = nullptr;
  const DgPattern* pattern = nullptr;
  std::size_t species_index = 0;
  std::span<const IonSpecies> species;
  PhysicalConstants consts;
  const DgField* c_prev = nullptr;
  const DgField* phi = nullptr;
  const DriftField* drift = nullptr;         // computed from phi when null
  const MembraneGeometry* membrane = nullptr;
  const InterfaceData* interface = nullptr;
  double penalty = 0.0;                      // gamma
  double dt = 0.0;
  bool include_drift = true;
  PointFunction volume_source;               // optional
  BoundaryFlux exterior_flux;                // optional: J.n on the outer boundary
};

/// Implicit Euler, SIP diffusion and upwinded drift for one species.
SparseSystem assemble_knp(const KnpInputs& in);

/// Integral of c over the domain (mol per unit depth).
double total_mass(const DgField& c);

}  // namespace knpemi
