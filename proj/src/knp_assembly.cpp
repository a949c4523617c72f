#include "knpemi/knp_assembly.hpp"

#include <cmath>

namespace knpemi {

DriftField drift_field(const DgField& phi) {
  const DgSpace& space = phi.space();
  const Mesh2D& mesh = space.mesh();
  const BasisTable& tab = space.volume_table();
  const int n = space.local_size();
  DriftField d;
  d.volume_points = tab.num_points;
  d.facet_points = static_cast<int>(space.facet_rule().size());
  d.cell_grad.resize(static_cast<std::size_t>(mesh.num_cells()) * d.volume_points);
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry& geo = space.geometry(c);
    for (int q = 0; q < tab.num_points; ++q) {
      Point2 g;
      for (int i = 0; i < n; ++i) g = g + phi.data()[space.dof(c, i)] * tab.g(q, i);
      d.cell_grad[c * d.volume_points + q] = geo.map_gradient(g);
    }
  }
  d.facet_dn.resize(static_cast<std::size_t>(mesh.num_facets()) * d.facet_points);
  FacetQuadrature fq;
  for (Index f = 0; f < mesh.num_facets(); ++f) {
    space.facet_quadrature(f, fq);
    const int sides = mesh.facet(f).num_sides();
    for (int q = 0; q < fq.num_points; ++q) {
      std::array<double, 2> dn{};
      for (int s = 0; s < sides; ++s) {
        Point2 g;
        for (int i = 0; i < n; ++i) g = g + phi.data()[space.dof(fq.cell[s], i)] * fq.point[q].side[s].grad[i];
        dn[s] = dot(g, fq.normal);
      }
      d.facet_dn[f * d.facet_points + q] = dn;
    }
  }
  return d;
}

SparseSystem assemble_knp(const KnpInputs& in) {
  if (!in.space || !in.pattern || !in.c_prev || !in.phi || !in.membrane || !in.interface) {
    throw ConfigError("assemble_knp: missing input");
  }
  if (!(in.dt > 0.0)) throw ConfigError("assemble_knp: time step must be positive");
  const DgSpace& space = *in.space;
  const Mesh2D& mesh = space.mesh();
  const int n = space.local_size();
  for (double v : in.phi->data()) {
    if (!std::isfinite(v)) throw NumericalError("assemble_knp: potential contains non-finite values");
  }
  DriftField own;
  const DriftField* drift = in.drift;
  if (!drift) {
    own = drift_field(*in.phi);
    drift = &own;
  }
  const IonSpecies& sp = in.species[in.species_index];
  const double D = sp.diffusivity;
  const double z = sp.valence;
  const double psi = in.consts.psi();
  const double drift_coef = in.include_drift ? z * psi * D : 0.0;
  const double upwind_coef = in.include_drift ? std::abs(z) * psi * D : 0.0;
  const double inv_dt = 1.0 / in.dt;

  MatrixBuilder mb(*in.pattern);
  std::vector<double> rhs(space.size(), 0.0);
  const BasisTable& tab = space.volume_table();
  const TriangleRule& rule = space.volume_rule();
  const std::vector<double>& cprev = in.c_prev->data();
  std::array<Point2, kMaxLocalDofs> grad{};
  std::array<double, kMaxLocalDofs * kMaxLocalDofs> local{};

  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry& geo = space.geometry(c);
    std::fill(local.begin(), local.end(), 0.0);
    for (int q = 0; q < tab.num_points; ++q) {
      const double w = rule.weights[q] * geo.det;
      for (int i = 0; i < n; ++i) grad[i] = geo.map_gradient(tab.g(q, i));
      const Point2 gphi = drift->cell_grad[c * drift->volume_points + q];
      double cp = 0.0;
      for (int i = 0; i < n; ++i) cp += tab.v(q, i) * cprev[space.dof(c, i)];
      double src = 0.0;
      if (in.volume_source) src = in.volume_source(geo.to_physical(rule.points[q]), mesh.cell_tag(c));
      for (int i = 0; i < n; ++i) {
        const double vi = tab.v(q, i);
        rhs[space.dof(c, i)] += w * (inv_dt * cp + src) * vi;
        const double gv = dot(gphi, grad[i]);
        for (int j = 0; j < n; ++j) {
          const double vj = tab.v(q, j);
          local[i * n + j] += w * (inv_dt * vj * vi + D * dot(grad[j], grad[i]) + drift_coef * vj * gv);
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) mb.add(c, i, c, j, local[i * n + j]);
    }
  }

  FacetQuadrature fq;
  std::size_t mpoint = 0;
  const std::vector<double>& phi = in.phi->data();
  for (Index f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facet(f);
    space.facet_quadrature(f, fq);
    const Point2 nrm = fq.normal;
    if (facet.cls == FacetClass::Exterior) {
      if (!in.exterior_flux) continue;
      const int tag = mesh.cell_tag(facet.cell[0]);
      for (int q = 0; q < fq.num_points; ++q) {
        const double flux = in.exterior_flux(fq.point[q].x, nrm, tag);
        for (int i = 0; i < n; ++i) rhs[space.dof(fq.cell[0], i)] -= fq.point[q].weight * flux * fq.point[q].side[0].value[i];
      }
      continue;
    }
    if (facet.cls == FacetClass::Membrane) {
      for (int q = 0; q < fq.num_points; ++q, ++mpoint) {
        const InterfacePoint& ip = in.interface->points[mpoint];
        const double w = fq.point[q].weight;
        double jump = 0.0;
        for (int i = 0; i < n; ++i) {
          jump += fq.point[q].side[0].value[i] * phi[space.dof(fq.cell[0], i)] -
                  fq.point[q].side[1].value[i] * phi[space.dof(fq.cell[1], i)];
        }
        const auto& Ck = ip.C_species[in.species_index];
        const auto& gk = ip.g[in.species_index];
        // intracellular side loses C_i([phi] - g_i), extracellular side gains C_e([phi] - g_e)
        const double flux_i = Ck[0] * (jump - gk[0]);
        const double flux_e = Ck[1] * (jump - gk[1]);
        for (int i = 0; i < n; ++i) {
          rhs[space.dof(fq.cell[0], i)] -= w * flux_i * fq.point[q].side[0].value[i];
          rhs[space.dof(fq.cell[1], i)] += w * flux_e * fq.point[q].side[1].value[i];
        }
      }
      continue;
    }
    const double pen = in.penalty * D / fq.length;
    for (int q = 0; q < fq.num_points; ++q) {
      const double w = fq.point[q].weight;
      const std::array<double, 2> dn = drift->facet_dn[f * drift->facet_points + q];
      const double speed = 0.5 * upwind_coef * std::abs(0.5 * (dn[0] + dn[1]));
      for (int s = 0; s < 2; ++s) {
        const double ss = s == 0 ? 1.0 : -1.0;
        const BasisEval& bs = fq.point[q].side[s];
        for (int i = 0; i < n; ++i) {
          const double dvi = dot(bs.grad[i], nrm);
          for (int t = 0; t < 2; ++t) {
            const double st = t == 0 ? 1.0 : -1.0;
            const BasisEval& bt = fq.point[q].side[t];
            for (int j = 0; j < n; ++j) {
              const double dcj = dot(bt.grad[j], nrm);
              const double vv = ss * st * bs.value[i] * bt.value[j];
              const double v = -0.5 * D * dcj * ss * bs.value[i] - 0.5 * D * dvi * st * bt.value[j] + pen * vv -
                               drift_coef * 0.5 * dn[t] * bt.value[j] * ss * bs.value[i] + speed * vv;
              mb.add(fq.cell[s], i, fq.cell[t], j, w * v);
            }
          }
        }
      }
    }
  }
  SparseSystem out;
  out.matrix = mb.finish();
  out.rhs = std::move(rhs);
  return out;
}

double total_mass(const DgField& c) { return integrate(c); }

}  // namespace knpemi
