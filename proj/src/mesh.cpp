#include "knpemi/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace knpemi {

const char* to_string(FacetClass c) {
  switch (c) {
    case FacetClass::Interior: return "interior";
    case FacetClass::Membrane: return "membrane";
    case FacetClass::Exterior: return "exterior";
  }
  return "?";
}

Mesh2D::Mesh2D(std::vector<Point2> vertices, std::vector<std::array<Index, 3>> triangles,
               std::vector<int> cell_tags)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), tags_(std::move(cell_tags)) {
  if (tags_.size() != triangles_.size()) {
    throw ConfigError("Mesh2D: one cell tag per triangle required");
  }
  for (auto& t : triangles_) {
    for (Index v : t) {
      if (v < 0 || v >= num_vertices()) throw ConfigError("Mesh2D: vertex index out of range");
    }
    const Point2 a = vertices_[t[0]], b = vertices_[t[1]], c = vertices_[t[2]];
    const double cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (cross == 0.0) throw ConfigError("Mesh2D: degenerate triangle");
    if (cross < 0.0) std::swap(t[1], t[2]);
  }
  build_facets();
  reclassify();
}

void Mesh2D::build_facets() {
  facets_.clear();
  cell_facets_.assign(triangles_.size(), {kNoCell, kNoCell, kNoCell});
  std::unordered_map<std::uint64_t, Index> lookup;
  lookup.reserve(triangles_.size() * 2);
  for (Index c = 0; c < num_cells(); ++c) {
    const auto& t = triangles_[c];
    for (int k = 0; k < 3; ++k) {
      const Index a = t[(k + 1) % 3];
      const Index b = t[(k + 2) % 3];
      const std::uint64_t key = (static_cast<std::uint64_t>(std::min(a, b)) << 32) |
                                static_cast<std::uint32_t>(std::max(a, b));
      auto [it, inserted] = lookup.try_emplace(key, num_facets());
      if (inserted) {
        Facet f;
        f.vertex = {a, b};
        f.cell = {c, kNoCell};
        f.local_edge = {static_cast<std::int8_t>(k), -1};
        facets_.push_back(f);
      } else {
        Facet& f = facets_[it->second];
        if (f.cell[1] != kNoCell) throw ConfigError("Mesh2D: edge shared by more than two triangles");
        if (f.vertex[0] != b || f.vertex[1] != a) {
          throw ConfigError("Mesh2D: inconsistent orientation of neighbouring triangles");
        }
        f.cell[1] = c;
        f.local_edge[1] = static_cast<std::int8_t>(k);
      }
      cell_facets_[c][k] = it->second;
    }
  }
}

void Mesh2D::reclassify() {
  for (Facet& f : facets_) {
    if (f.cell[1] == kNoCell) {
      f.cls = FacetClass::Exterior;
      continue;
    }
    const int t0 = tags_[f.cell[0]];
    const int t1 = tags_[f.cell[1]];
    if (t0 == t1) {
      f.cls = FacetClass::Interior;
      continue;
    }
    f.cls = FacetClass::Membrane;
    if (t0 == kEcsTag) {
      std::swap(f.cell[0], f.cell[1]);
      std::swap(f.local_edge[0], f.local_edge[1]);
      std::swap(f.vertex[0], f.vertex[1]);
    }
  }
}

double Mesh2D::signed_area(Index c) const {
  const auto& t = triangles_[c];
  const Point2 a = vertices_[t[0]], b = vertices_[t[1]], d = vertices_[t[2]];
  return 0.5 * ((b.x - a.x) * (d.y - a.y) - (b.y - a.y) * (d.x - a.x));
}

Point2 Mesh2D::centroid(Index c) const {
  const auto& t = triangles_[c];
  const Point2 s = vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]];
  return (1.0 / 3.0) * s;
}

double Mesh2D::facet_length(Index f) const {
  const Facet& e = facets_[f];
  return norm(vertices_[e.vertex[1]] - vertices_[e.vertex[0]]);
}

Point2 Mesh2D::facet_midpoint(Index f) const {
  const Facet& e = facets_[f];
  return 0.5 * (vertices_[e.vertex[0]] + vertices_[e.vertex[1]]);
}

Point2 Mesh2D::facet_normal(Index f) const {
  const Facet& e = facets_[f];
  const Point2 d = vertices_[e.vertex[1]] - vertices_[e.vertex[0]];
  const double len = norm(d);
  // vertices run counter-clockwise around cell[0]: outward normal is d rotated by -90 degrees
  return {d.y / len, -d.x / len};
}

Index Mesh2D::count(FacetClass c) const {
  return static_cast<Index>(std::count_if(facets_.begin(), facets_.end(),
                                          [c](const Facet& f) { return f.cls == c; }));
}

namespace {

bool on_grid(double value, double origin, double spacing) {
  const double k = (value - origin) / spacing;
  return std::abs(k - std::round(k)) <= 1e-8 * std::max(1.0, std::abs(k));
}

}  // namespace

void validate(const GeometrySpec& spec) {
  const Rect& b = spec.box;
  if (!(b.x1 > b.x0) || !(b.y1 > b.y0)) throw ConfigError("geometry: outer box must have positive extent");
  if (spec.nx < 1 || spec.ny < 1) throw ConfigError("geometry: resolution must be at least 1 x 1");
  const double dx = b.width() / spec.nx;
  const double dy = b.height() / spec.ny;
  for (std::size_t i = 0; i < spec.ics.size(); ++i) {
    const Rect& r = spec.ics[i];
    std::ostringstream who;
    who << "geometry: intracellular rectangle " << i + 1;
    if (!(r.x1 > r.x0) || !(r.y1 > r.y0)) throw ConfigError(who.str() + " has nonpositive extent");
    if (!(r.x0 > b.x0) || !(r.x1 < b.x1) || !(r.y0 > b.y0) || !(r.y1 < b.y1)) {
      throw ConfigError(who.str() + " is not strictly inside the outer box");
    }
    if (!on_grid(r.x0, b.x0, dx) || !on_grid(r.x1, b.x0, dx) || !on_grid(r.y0, b.y0, dy) ||
        !on_grid(r.y1, b.y0, dy)) {
      throw ConfigError(who.str() + " has corners off the structured grid; the mesh would not conform");
    }
    for (std::size_t j = 0; j < i; ++j) {
      const Rect& q = spec.ics[j];
      const bool apart = r.x0 > q.x1 || q.x0 > r.x1 || r.y0 > q.y1 || q.y0 > r.y1;
      if (!apart) throw ConfigError(who.str() + " touches or overlaps rectangle " + std::to_string(j + 1));
    }
  }
}

Mesh2D build_structured_mesh(const GeometrySpec& spec) {
  validate(spec);
  const int nx = spec.nx, ny = spec.ny;
  const Rect& b = spec.box;
  std::vector<Point2> vertices;
  vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // hit the box corners exactly
      const double x = i == nx ? b.x1 : b.x0 + b.width() * i / nx;
      const double y = j == ny ? b.y1 : b.y0 + b.height() * j / ny;
      vertices.push_back({x, y});
    }
  }
  auto vid = [nx](int i, int j) { return static_cast<Index>(j * (nx + 1) + i); };
  std::vector<std::array<Index, 3>> tris;
  tris.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      tris.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      tris.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  std::vector<int> tags(tris.size(), kEcsTag);
  for (std::size_t c = 0; c < tris.size(); ++c) {
    const Point2 g = (1.0 / 3.0) * (vertices[tris[c][0]] + vertices[tris[c][1]] + vertices[tris[c][2]]);
    for (std::size_t r = 0; r < spec.ics.size(); ++r) {
      if (spec.ics[r].contains(g)) {
        tags[c] = static_cast<int>(r) + 1;
        break;
      }
    }
  }
  Mesh2D mesh(std::move(vertices), std::move(tris), std::move(tags));
  mesh.set_description("structured " + std::to_string(nx) + "x" + std::to_string(ny) +
                       ", diagonal bottom-left to top-right");
  return mesh;
}

Mesh2D classify_facets(Mesh2D mesh) {
  mesh.reclassify();
  return mesh;
}

GeometrySpec refine_uniform(GeometrySpec spec) {
  spec.nx *= 2;
  spec.ny *= 2;
  return spec;
}

double membrane_length(const Mesh2D& mesh) {
  double sum = 0.0;
  for (Index f = 0; f < mesh.num_facets(); ++f) {
    if (mesh.facet(f).cls == FacetClass::Membrane) sum += mesh.facet_length(f);
  }
  return sum;
}

}  // namespace knpemi
