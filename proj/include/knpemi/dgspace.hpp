#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "knpemi/mesh.hpp"
#include "knpemi/quadrature.hpp"

namespace knpemi {

inline constexpr int kMaxLocalDofs = 6;
inline constexpr int kMaxFacetPoints = 4;

int local_dof_count(int degree);

/// Nodal Lagrange basis on the reference triangle. Nodes: the three vertices,
/// then (p = 2) the midpoints of local edges 0, 1, 2.
void reference_basis(int degree, Point2 ref, std::span<double> values, std::span<Point2> grads);
std::span<const Point2> reference_nodes(int degree);

/// Reference coordinates of the point at parameter t along local edge k,
/// traversed counter-clockwise.
Point2 reference_edge_point(int local_edge, double t);

/// Affine map x = origin + J * ref.
struct CellGeometry {
  Point2 origin;
  std::array<double, 4> jac{};      // row-major J
  std::array<double, 4> inv_t{};    // row-major J^{-T}
  double det = 0.0;

  Point2 to_physical(Point2 r) const {
    return {origin.x + jac[0] * r.x + jac[1] * r.y, origin.y + jac[2] * r.x + jac[3] * r.y};
  }
  Point2 map_gradient(Point2 g) const {
    return {inv_t[0] * g.x + inv_t[1] * g.y, inv_t[2] * g.x + inv_t[3] * g.y};
  }
};

/// Basis values at a fixed set of reference points, row q holds all basis
/// functions at point q.
struct BasisTable {
  int num_points = 0;
  int num_basis = 0;
  std::vector<double> value;
  std::vector<Point2> grad;  // reference gradients

  double v(int q, int i) const { return value[q * num_basis + i]; }
  Point2 g(int q, int i) const { return grad[q * num_basis + i]; }
};

struct BasisEval {
  std::array<double, kMaxLocalDofs> value{};
  std::array<Point2, kMaxLocalDofs> grad{};
};

/// Both one-sided traces of the basis at one facet point. side[1] is unused
/// on exterior facets.
struct TracePoint {
  Point2 x;
  double weight = 0.0;  // physical quadrature weight (includes facet length)
  std::array<BasisEval, 2> side;
};

struct FacetQuadrature {
  Index facet = -1;
  std::array<Index, 2> cell{kNoCell, kNoCell};
  Point2 normal;  // from cell[0] to cell[1]
  double length = 0.0;
  int num_points = 0;
  std::array<TracePoint, kMaxFacetPoints> point;
};

/// Fully discontinuous P_p space, p in {1, 2}. Dof of local basis i on cell c
/// is c * local_size() + i. Immutable.
class DgSpace {
 public:
  DgSpace(std::shared_ptr<const Mesh2D> mesh, int degree);

  const Mesh2D& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh2D>& mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  int local_size() const { return nloc_; }
  Index size() const { return mesh_->num_cells() * nloc_; }
  Index dof(Index cell, int local) const { return cell * nloc_ + local; }

  const CellGeometry& geometry(Index cell) const { return geometry_[cell]; }
  Point2 node(Index cell, int local) const;

  /// Values and physical gradients of all local basis functions.
  BasisEval eval_basis(Index cell, Point2 ref) const;

  /// Traces at facet parameter s in [0,1], measured from facet vertex 0.
  /// Throws DomainError on exterior facets; use exterior_trace there.
  FacetQuadrature facet_traces(Index facet, double s) const;
  BasisEval exterior_trace(Index facet, double s, Point2* x = nullptr) const;

  /// Facet quadrature with p + 2 Gauss points; works for every facet class.
  void facet_quadrature(Index facet, FacetQuadrature& out) const;

  const TriangleRule& volume_rule() const { return volume_rule_; }
  const BasisTable& volume_table() const { return volume_table_; }
  const LineRule& facet_rule() const { return facet_rule_; }
  Point2 normal(Index facet) const { return normals_[facet]; }

 private:
  BasisEval eval_side(Index cell, int local_edge, double t) const;

  std::shared_ptr<const Mesh2D> mesh_;
  int degree_ = 1;
  int nloc_ = 3;
  std::vector<CellGeometry> geometry_;
  std::vector<Point2> normals_;
  TriangleRule volume_rule_;
  BasisTable volume_table_;
  LineRule facet_rule_;
  // facet_tables_[2*k + flip]: basis on local edge k at facet points, parameter reversed if flip
  std::array<BasisTable, 6> facet_tables_;
};

using PointFunction = std::function<double(Point2 x, int cell_tag)>;

/// Coefficients of a DG function; length equals the space size.
class DgField {
 public:
  DgField() = default;
  explicit DgField(std::shared_ptr<const DgSpace> space, double value = 0.0);
  DgField(std::shared_ptr<const DgSpace> space, std::vector<double> values);

  const DgSpace& space() const { return *space_; }
  const std::shared_ptr<const DgSpace>& space_ptr() const { return space_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& data() { return values_; }
  const std::vector<double>& data() const { return values_; }
  std::span<const double> cell_values(Index cell) const {
    return std::span<const double>(values_).subspan(space_->dof(cell, 0), space_->local_size());
  }
  Index size() const { return static_cast<Index>(values_.size()); }

  double eval(Index cell, Point2 ref) const;
  Point2 gradient(Index cell, Point2 ref) const;

 private:
  std::shared_ptr<const DgSpace> space_;
  std::vector<double> values_;
};

/// Elementwise nodal interpolation.
DgField interpolate(std::shared_ptr<const DgSpace> space, const PointFunction& f);

/// Elementwise L2 projection with a rule of degree 2p + extra_degree + 2.
DgField l2_projection(std::shared_ptr<const DgSpace> space, const PointFunction& f, int extra_degree = 2);

/// Integral of a point function over the mesh with a rule of the given degree.
double integrate(const DgSpace& space, const PointFunction& f, int degree);

/// sqrt of the integral of (u_h - u)^2 with a rule of degree >= 2p+2.
double l2_error(const DgField& field, const PointFunction& exact, int extra_degree = 0);

/// Integral of the field over the domain, optionally restricted to one tag.
double integrate(const DgField& field);
double integrate(const DgField& field, int tag);

}  // namespace knpemi
