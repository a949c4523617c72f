#include "knpemi/emi_assembly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace knpemi {

namespace {

double trace_value(const DgField& u, const FacetQuadrature& fq, int q, int side) {
  const DgSpace& s = u.space();
  double v = 0.0;
  for (int i = 0; i < s.local_size(); ++i) v += fq.point[q].side[side].value[i] * u.data()[s.dof(fq.cell[side], i)];
  return v;
}

Point2 trace_gradient(const DgField& u, const FacetQuadrature& fq, int q, int side) {
  const DgSpace& s = u.space();
  Point2 g;
  for (int i = 0; i < s.local_size(); ++i) g = g + u.data()[s.dof(fq.cell[side], i)] * fq.point[q].side[side].grad[i];
  return g;
}

double facet_kappa(double k0, double k1) {
  if (k0 > 0.0 && k1 > 0.0) return 2.0 * k0 * k1 / (k0 + k1);
  return 0.5 * (std::abs(k0) + std::abs(k1));
}

}  // namespace

EmiSystem assemble_emi(const EmiInputs& in) {
  if (!in.space || !in.pattern || !in.membrane || !in.interface) throw ConfigError("assemble_emi: missing input");
  const DgSpace& space = *in.space;
  const Mesh2D& mesh = space.mesh();
  const int n = space.local_size();
  const std::size_t ns = in.species.size();
  if (in.concs.size() != ns) throw ConfigError("assemble_emi: one concentration field per species required");
  if (in.interface->points.size() != in.membrane->size()) {
    throw ConfigError("assemble_emi: interface data does not match the membrane points");
  }
  const double F = in.consts.faraday;
  const double fpsi = F * in.consts.psi();
  // kappa and current weights per species
  std::vector<double> kw(ns), cw(ns);
  for (std::size_t k = 0; k < ns; ++k) {
    const double z = in.species[k].valence;
    kw[k] = fpsi * z * z * in.species[k].diffusivity;
    cw[k] = F * z * in.species[k].diffusivity;
  }

  MatrixBuilder mb(*in.pattern);
  std::vector<double> rhs(space.size(), 0.0);
  const BasisTable& tab = space.volume_table();
  const TriangleRule& rule = space.volume_rule();
  std::array<Point2, kMaxLocalDofs> grad{};
  std::array<double, kMaxLocalDofs * kMaxLocalDofs> local{};

  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry& geo = space.geometry(c);
    std::fill(local.begin(), local.end(), 0.0);
    for (int q = 0; q < tab.num_points; ++q) {
      const double w = rule.weights[q] * geo.det;
      for (int i = 0; i < n; ++i) grad[i] = geo.map_gradient(tab.g(q, i));
      double kappa = 0.0;
      Point2 drive;  // F sum z D grad c
      for (std::size_t k = 0; k < ns; ++k) {
        const std::vector<double>& cv = in.concs[k].data();
        double val = 0.0;
        Point2 g;
        for (int i = 0; i < n; ++i) {
          const double ci = cv[space.dof(c, i)];
          val += tab.v(q, i) * ci;
          g = g + ci * grad[i];
        }
        kappa += kw[k] * val;
        drive = drive + cw[k] * g;
      }
      double src = 0.0;
      if (in.volume_source) src = in.volume_source(geo.to_physical(rule.points[q]), mesh.cell_tag(c));
      for (int i = 0; i < n; ++i) {
        rhs[space.dof(c, i)] += w * (-dot(drive, grad[i]) + src * tab.v(q, i));
        for (int j = 0; j < n; ++j) local[i * n + j] += w * kappa * dot(grad[j], grad[i]);
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) mb.add(c, i, c, j, local[i * n + j]);
    }
  }

  FacetQuadrature fq;
  std::size_t mpoint = 0;
  for (Index f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facet(f);
    space.facet_quadrature(f, fq);
    const Point2 nrm = fq.normal;
    if (facet.cls == FacetClass::Exterior) {
      if (!in.exterior_current) continue;
      const int tag = mesh.cell_tag(facet.cell[0]);
      for (int q = 0; q < fq.num_points; ++q) {
        const double flux = in.exterior_current(fq.point[q].x, nrm, tag);
        for (int i = 0; i < n; ++i) rhs[space.dof(fq.cell[0], i)] -= fq.point[q].weight * flux * fq.point[q].side[0].value[i];
      }
      continue;
    }
    if (facet.cls == FacetClass::Membrane) {
      for (int q = 0; q < fq.num_points; ++q, ++mpoint) {
        const InterfacePoint& ip = in.interface->points[mpoint];
        const double w = fq.point[q].weight;
        for (int s = 0; s < 2; ++s) {
          const double ss = s == 0 ? 1.0 : -1.0;
          for (int i = 0; i < n; ++i) {
            const double wi = ss * fq.point[q].side[s].value[i];
            rhs[space.dof(fq.cell[s], i)] += w * ip.C * ip.f[s] * wi;
            for (int t = 0; t < 2; ++t) {
              const double st = t == 0 ? 1.0 : -1.0;
              for (int j = 0; j < n; ++j) {
                mb.add(fq.cell[s], i, fq.cell[t], j, w * ip.C * wi * st * fq.point[q].side[t].value[j]);
              }
            }
          }
        }
      }
      continue;
    }
    const double pen = in.penalty / fq.length;
    for (int q = 0; q < fq.num_points; ++q) {
      const double w = fq.point[q].weight;
      std::array<double, 2> kap{};
      Point2 drive_avg;
      for (int s = 0; s < 2; ++s) {
        for (std::size_t k = 0; k < ns; ++k) {
          kap[s] += kw[k] * trace_value(in.concs[k], fq, q, s);
          drive_avg = drive_avg + 0.5 * cw[k] * trace_gradient(in.concs[k], fq, q, s);
        }
      }
      const double kf = facet_kappa(kap[0], kap[1]);
      const double drive_n = dot(drive_avg, nrm);
      for (int s = 0; s < 2; ++s) {
        const double ss = s == 0 ? 1.0 : -1.0;
        const BasisEval& bs = fq.point[q].side[s];
        for (int i = 0; i < n; ++i) {
          rhs[space.dof(fq.cell[s], i)] += w * drive_n * ss * bs.value[i];
          const double dwi = dot(bs.grad[i], nrm);
          for (int t = 0; t < 2; ++t) {
            const double st = t == 0 ? 1.0 : -1.0;
            const BasisEval& bt = fq.point[q].side[t];
            for (int j = 0; j < n; ++j) {
              const double duj = dot(bt.grad[j], nrm);
              const double v = -0.5 * kap[t] * duj * ss * bs.value[i] - 0.5 * kap[s] * dwi * st * bt.value[j] +
                               pen * kf * ss * st * bs.value[i] * bt.value[j];
              mb.add(fq.cell[s], i, fq.cell[t], j, w * v);
            }
          }
        }
      }
    }
  }

  EmiSystem out;
  out.penalty = in.penalty;
  out.system.matrix = mb.finish();
  out.system.rhs = std::move(rhs);
  out.system.nullspace = std::vector<double>(space.size(), 1.0);
  project_out(out.system.rhs, *out.system.nullspace);
  return out;
}

CsrMatrix assemble_mass(const DgSpace& space, const DgPattern& pattern) {
  MatrixBuilder mb(pattern);
  const BasisTable& tab = space.volume_table();
  const TriangleRule& rule = space.volume_rule();
  const int n = space.local_size();
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    const double det = space.geometry(c).det;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int q = 0; q < tab.num_points; ++q) s += rule.weights[q] * tab.v(q, i) * tab.v(q, j);
        mb.add(c, i, c, j, s * det);
      }
    }
  }
  return mb.finish();
}

double rayleigh_probe(const CsrMatrix& a, int trials, std::span<const double> nullspace, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  std::vector<double> x(a.rows()), y(a.rows());
  double best = std::numeric_limits<double>::infinity();
  for (int t = 0; t < std::max(1, trials); ++t) {
    for (double& v : x) v = dist(rng);
    if (!nullspace.empty()) project_out(x, nullspace);
    const double xx = dot(x, x);
    if (xx == 0.0) continue;
    a.multiply(x, y);
    best = std::min(best, dot(x, y) / xx);
  }
  return best;
}

double mean_conductivity(const DgSpace& space, std::span<const DgField> concs, std::span<const IonSpecies> species,
                         const PhysicalConstants& consts) {
  double total = 0.0, area = 0.0;
  for (Index c = 0; c < space.mesh().num_cells(); ++c) area += space.mesh().cell_area(c);
  for (std::size_t k = 0; k < species.size(); ++k) {
    const double z = species[k].valence;
    total += consts.faraday * consts.psi() * z * z * species[k].diffusivity * integrate(concs[k]);
  }
  return total / area;
}

}  // namespace knpemi
