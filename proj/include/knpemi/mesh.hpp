#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "knpemi/common.hpp"

namespace knpemi {

/// Axis-aligned rectangle [x0,x1] x [y0,y1] in meters.
struct Rect {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  double perimeter() const { return 2.0 * (width() + height()); }
  bool contains(Point2 p) const { return p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Outer box, intracellular inclusions (tags 1..N in list order) and the
/// structured resolution nx x ny.
struct GeometrySpec {
  Rect box{0.0, 1.0, 0.0, 1.0};
  std::vector<Rect> ics;
  int nx = 16;
  int ny = 16;
  friend bool operator==(const GeometrySpec&, const GeometrySpec&) = default;
};

enum class FacetClass : std::uint8_t { Interior, Membrane, Exterior };

const char* to_string(FacetClass c);

inline constexpr Index kNoCell = -1;
inline constexpr int kEcsTag = 0;

/// An edge of the triangulation. Vertices are ordered counter-clockwise as
/// seen from `cell[0]`; the unit normal points from cell[0] to cell[1].
/// For membrane facets cell[0] is the intracellular triangle, so the jump
/// u(cell[0]) - u(cell[1]) equals u_i - u_e.
struct Facet {
  std::array<Index, 2> vertex{};
  std::array<Index, 2> cell{kNoCell, kNoCell};
  std::array<std::int8_t, 2> local_edge{-1, -1};
  FacetClass cls = FacetClass::Interior;

  int num_sides() const { return cell[1] == kNoCell ? 1 : 2; }
};

/// Conforming triangulation with subdomain tags and classified facets.
/// Immutable after construction.
///
/// Local edge k of a triangle is the edge opposite local vertex k,
/// traversed counter-clockwise: 0 = (v1,v2), 1 = (v2,v0), 2 = (v0,v1).
class Mesh2D {
 public:
  Mesh2D() = default;
  /// Builds facets and classification; triangles are reoriented to positive
  /// signed area.
  Mesh2D(std::vector<Point2> vertices, std::vector<std::array<Index, 3>> triangles,
         std::vector<int> cell_tags);

  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index num_cells() const { return static_cast<Index>(triangles_.size()); }
  Index num_facets() const { return static_cast<Index>(facets_.size()); }

  Point2 vertex(Index v) const { return vertices_[v]; }
  const std::array<Index, 3>& cell(Index c) const { return triangles_[c]; }
  int cell_tag(Index c) const { return tags_[c]; }
  const Facet& facet(Index f) const { return facets_[f]; }
  /// Facet index of local edge k of cell c.
  Index cell_facet(Index c, int k) const { return cell_facets_[c][k]; }
  std::span<const Facet> facets() const { return facets_; }
  std::span<const int> cell_tags() const { return tags_; }

  double signed_area(Index c) const;
  double cell_area(Index c) const { return signed_area(c); }
  Point2 centroid(Index c) const;
  double facet_length(Index f) const;
  Point2 facet_midpoint(Index f) const;
  /// Unit normal pointing out of facet(f).cell[0].
  Point2 facet_normal(Index f) const;

  Index count(FacetClass c) const;
  /// Free-form provenance, e.g. the diagonal orientation of a structured grid.
  const std::string& description() const { return description_; }
  void set_description(std::string d) { description_ = std::move(d); }

  /// Recomputes the facet classes from the cell tags (used by classify_facets).
  void reclassify();

 private:
  void build_facets();

  std::vector<Point2> vertices_;
  std::vector<std::array<Index, 3>> triangles_;
  std::vector<int> tags_;
  std::vector<Facet> facets_;
  std::vector<std::array<Index, 3>> cell_facets_;
  std::string description_;
};

/// Throws ConfigError if the inclusions overlap, touch the outer box, or do
/// not align with the grid.
void validate(const GeometrySpec& spec);

/// 2*nx*ny triangles; each grid rectangle is split along the diagonal from
/// its bottom-left to its top-right corner. Cell tags: index+1 of the
/// inclusion containing the centroid, 0 otherwise.
Mesh2D build_structured_mesh(const GeometrySpec& spec);

/// Labels every facet (Interior / Membrane / Exterior) and orients membrane
/// facets intracellular-side first.
Mesh2D classify_facets(Mesh2D mesh);

GeometrySpec refine_uniform(GeometrySpec spec);

/// Sum of facet lengths over membrane facets.
double membrane_length(const Mesh2D& mesh);

}  // namespace knpemi
