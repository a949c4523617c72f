#include "knpemi/dgspace.hpp"

#include <cmath>

namespace knpemi {

int local_dof_count(int degree) {
  if (degree != 1 && degree != 2) throw ConfigError("DG degree must be 1 or 2");
  return (degree + 1) * (degree + 2) / 2;
}

namespace {

constexpr std::array<Point2, 3> kP1Nodes{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};
constexpr std::array<Point2, 6> kP2Nodes{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}, {0.0, 0.5}, {0.5, 0.0}}};

BasisTable tabulate(int degree, std::span<const Point2> points) {
  BasisTable t;
  t.num_points = static_cast<int>(points.size());
  t.num_basis = local_dof_count(degree);
  t.value.resize(static_cast<std::size_t>(t.num_points) * t.num_basis);
  t.grad.resize(t.value.size());
  for (int q = 0; q < t.num_points; ++q) {
    reference_basis(degree, points[q], std::span<double>(t.value).subspan(q * t.num_basis, t.num_basis),
                    std::span<Point2>(t.grad).subspan(q * t.num_basis, t.num_basis));
  }
  return t;
}

}  // namespace

std::span<const Point2> reference_nodes(int degree) {
  if (degree == 1) return kP1Nodes;
  if (degree == 2) return kP2Nodes;
  throw ConfigError("DG degree must be 1 or 2");
}

void reference_basis(int degree, Point2 r, std::span<double> v, std::span<Point2> g) {
  const double l0 = 1.0 - r.x - r.y, l1 = r.x, l2 = r.y;
  const Point2 d0{-1.0, -1.0}, d1{1.0, 0.0}, d2{0.0, 1.0};
  if (degree == 1) {
    v[0] = l0;
    v[1] = l1;
    v[2] = l2;
    g[0] = d0;
    g[1] = d1;
    g[2] = d2;
    return;
  }
  if (degree != 2) throw ConfigError("DG degree must be 1 or 2");
  v[0] = l0 * (2.0 * l0 - 1.0);
  v[1] = l1 * (2.0 * l1 - 1.0);
  v[2] = l2 * (2.0 * l2 - 1.0);
  v[3] = 4.0 * l1 * l2;
  v[4] = 4.0 * l2 * l0;
  v[5] = 4.0 * l0 * l1;
  g[0] = (4.0 * l0 - 1.0) * d0;
  g[1] = (4.0 * l1 - 1.0) * d1;
  g[2] = (4.0 * l2 - 1.0) * d2;
  g[3] = 4.0 * (l2 * d1 + l1 * d2);
  g[4] = 4.0 * (l0 * d2 + l2 * d0);
  g[5] = 4.0 * (l1 * d0 + l0 * d1);
}

Point2 reference_edge_point(int local_edge, double t) {
  switch (local_edge) {
    case 0: return {1.0 - t, t};
    case 1: return {0.0, 1.0 - t};
    case 2: return {t, 0.0};
    default: throw DomainError("local edge index out of range");
  }
}

DgSpace::DgSpace(std::shared_ptr<const Mesh2D> mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree), nloc_(local_dof_count(degree)) {
  if (!mesh_) throw ConfigError("DgSpace: null mesh");
  const Mesh2D& m = *mesh_;
  geometry_.resize(m.num_cells());
  for (Index c = 0; c < m.num_cells(); ++c) {
    const auto& t = m.cell(c);
    const Point2 a = m.vertex(t[0]), b = m.vertex(t[1]), d = m.vertex(t[2]);
    CellGeometry& g = geometry_[c];
    g.origin = a;
    g.jac = {b.x - a.x, d.x - a.x, b.y - a.y, d.y - a.y};
    g.det = g.jac[0] * g.jac[3] - g.jac[1] * g.jac[2];
    g.inv_t = {g.jac[3] / g.det, -g.jac[2] / g.det, -g.jac[1] / g.det, g.jac[0] / g.det};
  }
  normals_.resize(m.num_facets());
  for (Index f = 0; f < m.num_facets(); ++f) normals_[f] = m.facet_normal(f);

  volume_rule_ = triangle_rule(2 * degree_ + 2);
  volume_table_ = tabulate(degree_, volume_rule_.points);
  facet_rule_ = gauss_legendre(degree_ + 2);
  for (int k = 0; k < 3; ++k) {
    for (int flip = 0; flip < 2; ++flip) {
      std::vector<Point2> pts;
      for (double s : facet_rule_.points) pts.push_back(reference_edge_point(k, flip ? 1.0 - s : s));
      facet_tables_[2 * k + flip] = tabulate(degree_, pts);
    }
  }
}

Point2 DgSpace::node(Index cell, int local) const {
  return geometry_[cell].to_physical(reference_nodes(degree_)[local]);
}

BasisEval DgSpace::eval_basis(Index cell, Point2 ref) const {
  BasisEval e;
  reference_basis(degree_, ref, std::span<double>(e.value).first(nloc_), std::span<Point2>(e.grad).first(nloc_));
  const CellGeometry& g = geometry_[cell];
  for (int i = 0; i < nloc_; ++i) e.grad[i] = g.map_gradient(e.grad[i]);
  return e;
}

BasisEval DgSpace::eval_side(Index cell, int local_edge, double t) const {
  return eval_basis(cell, reference_edge_point(local_edge, t));
}

FacetQuadrature DgSpace::facet_traces(Index facet, double s) const {
  const Facet& f = mesh_->facet(facet);
  if (f.cls == FacetClass::Exterior) throw DomainError("facet_traces: exterior facet has a single trace");
  FacetQuadrature out;
  out.facet = facet;
  out.cell = f.cell;
  out.normal = normals_[facet];
  out.length = mesh_->facet_length(facet);
  out.num_points = 1;
  TracePoint& p = out.point[0];
  p.x = (1.0 - s) * mesh_->vertex(f.vertex[0]) + s * mesh_->vertex(f.vertex[1]);
  p.weight = out.length;
  p.side[0] = eval_side(f.cell[0], f.local_edge[0], s);
  p.side[1] = eval_side(f.cell[1], f.local_edge[1], 1.0 - s);
  return out;
}

BasisEval DgSpace::exterior_trace(Index facet, double s, Point2* x) const {
  const Facet& f = mesh_->facet(facet);
  if (x) *x = (1.0 - s) * mesh_->vertex(f.vertex[0]) + s * mesh_->vertex(f.vertex[1]);
  return eval_side(f.cell[0], f.local_edge[0], s);
}

void DgSpace::facet_quadrature(Index facet, FacetQuadrature& out) const {
  const Facet& f = mesh_->facet(facet);
  out.facet = facet;
  out.cell = f.cell;
  out.normal = normals_[facet];
  const Point2 a = mesh_->vertex(f.vertex[0]);
  const Point2 b = mesh_->vertex(f.vertex[1]);
  out.length = norm(b - a);
  out.num_points = static_cast<int>(facet_rule_.size());
  const int sides = f.num_sides();
  for (int q = 0; q < out.num_points; ++q) {
    TracePoint& p = out.point[q];
    const double s = facet_rule_.points[q];
    p.x = (1.0 - s) * a + s * b;
    p.weight = facet_rule_.weights[q] * out.length;
    for (int side = 0; side < sides; ++side) {
      const BasisTable& t = facet_tables_[2 * f.local_edge[side] + side];
      const CellGeometry& g = geometry_[f.cell[side]];
      for (int i = 0; i < nloc_; ++i) {
        p.side[side].value[i] = t.v(q, i);
        p.side[side].grad[i] = g.map_gradient(t.g(q, i));
      }
    }
  }
}

DgField::DgField(std::shared_ptr<const DgSpace> space, double value)
    : space_(std::move(space)), values_(static_cast<std::size_t>(space_->size()), value) {}

DgField::DgField(std::shared_ptr<const DgSpace> space, std::vector<double> values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (static_cast<Index>(values_.size()) != space_->size()) {
    throw ConfigError("DgField: coefficient count does not match the space");
  }
}

double DgField::eval(Index cell, Point2 ref) const {
  std::array<double, kMaxLocalDofs> v{};
  std::array<Point2, kMaxLocalDofs> g{};
  const int n = space_->local_size();
  reference_basis(space_->degree(), ref, std::span<double>(v).first(n), std::span<Point2>(g).first(n));
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += v[i] * values_[space_->dof(cell, i)];
  return sum;
}

Point2 DgField::gradient(Index cell, Point2 ref) const {
  const BasisEval e = space_->eval_basis(cell, ref);
  Point2 sum;
  for (int i = 0; i < space_->local_size(); ++i) sum = sum + values_[space_->dof(cell, i)] * e.grad[i];
  return sum;
}

DgField interpolate(std::shared_ptr<const DgSpace> space, const PointFunction& f) {
  DgField u(space);
  const Mesh2D& mesh = space->mesh();
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    for (int i = 0; i < space->local_size(); ++i) u.data()[space->dof(c, i)] = f(space->node(c, i), mesh.cell_tag(c));
  }
  return u;
}

DgField l2_projection(std::shared_ptr<const DgSpace> space, const PointFunction& f, int extra_degree) {
  DgField u(space);
  const TriangleRule rule = triangle_rule(2 * space->degree() + 2 + std::max(0, extra_degree));
  const int n = space->local_size();
  std::array<double, kMaxLocalDofs> v{};
  std::array<Point2, kMaxLocalDofs> g{};
  std::array<double, kMaxLocalDofs * kMaxLocalDofs> m{};
  std::array<double, kMaxLocalDofs> b{};
  for (Index c = 0; c < space->mesh().num_cells(); ++c) {
    const CellGeometry& geo = space->geometry(c);
    const int tag = space->mesh().cell_tag(c);
    m.fill(0.0);
    b.fill(0.0);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      reference_basis(space->degree(), rule.points[q], std::span<double>(v).first(n), std::span<Point2>(g).first(n));
      const double fq = f(geo.to_physical(rule.points[q]), tag);
      for (int i = 0; i < n; ++i) {
        b[i] += rule.weights[q] * fq * v[i];
        for (int j = 0; j < n; ++j) m[i * n + j] += rule.weights[q] * v[i] * v[j];
      }
    }
    // reference mass matrix is SPD; no pivoting needed
    for (int p = 0; p < n; ++p) {
      for (int r = p + 1; r < n; ++r) {
        const double l = m[r * n + p] / m[p * n + p];
        for (int j = p; j < n; ++j) m[r * n + j] -= l * m[p * n + j];
        b[r] -= l * b[p];
      }
    }
    for (int r = n - 1; r >= 0; --r) {
      double s = b[r];
      for (int j = r + 1; j < n; ++j) s -= m[r * n + j] * b[j];
      u.data()[space->dof(c, r)] = s / m[r * n + r];
      b[r] = u.data()[space->dof(c, r)];
    }
  }
  return u;
}

double integrate(const DgSpace& space, const PointFunction& f, int degree) {
  const TriangleRule rule = triangle_rule(degree);
  double sum = 0.0;
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    const CellGeometry& geo = space.geometry(c);
    const int tag = space.mesh().cell_tag(c);
    double local = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) local += rule.weights[q] * f(geo.to_physical(rule.points[q]), tag);
    sum += local * std::abs(geo.det);
  }
  return sum;
}

double l2_error(const DgField& field, const PointFunction& exact, int extra_degree) {
  const DgSpace& space = field.space();
  const TriangleRule rule = triangle_rule(2 * space.degree() + 2 + std::max(0, extra_degree));
  const int n = space.local_size();
  std::array<double, kMaxLocalDofs> v{};
  std::array<Point2, kMaxLocalDofs> g{};
  double sum = 0.0;
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    const CellGeometry& geo = space.geometry(c);
    const int tag = space.mesh().cell_tag(c);
    double local = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      reference_basis(space.degree(), rule.points[q], std::span<double>(v).first(n), std::span<Point2>(g).first(n));
      double uh = 0.0;
      for (int i = 0; i < n; ++i) uh += v[i] * field.data()[space.dof(c, i)];
      const double e = uh - exact(geo.to_physical(rule.points[q]), tag);
      local += rule.weights[q] * e * e;
    }
    sum += local * std::abs(geo.det);
  }
  return std::sqrt(sum);
}

namespace {

double integrate_impl(const DgField& field, const int* tag) {
  const DgSpace& space = field.space();
  const BasisTable& t = space.volume_table();
  const TriangleRule& rule = space.volume_rule();
  double sum = 0.0;
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    if (tag && space.mesh().cell_tag(c) != *tag) continue;
    double local = 0.0;
    for (int q = 0; q < t.num_points; ++q) {
      double uh = 0.0;
      for (int i = 0; i < t.num_basis; ++i) uh += t.v(q, i) * field.data()[space.dof(c, i)];
      local += rule.weights[q] * uh;
    }
    sum += local * std::abs(space.geometry(c).det);
  }
  return sum;
}

}  // namespace

double integrate(const DgField& field) { return integrate_impl(field, nullptr); }
double integrate(const DgField& field, int tag) { return integrate_impl(field, &tag); }

}  // namespace knpemi
