#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "knpemi/dgspace.hpp"
#include "knpemi/sparse.hpp"

namespace knpemi::io {

namespace fs = std::filesystem;

/// Opens a file for writing, creating parent directories. Throws IoError.
std::ofstream open_output(const fs::path& path);
void ensure_directory(const fs::path& dir);

/// Legacy ASCII VTK unstructured grid of the triangulation with cell tags.
void write_vtk_mesh(const fs::path& path, const Mesh2D& mesh);

/// Discontinuous field: every cell gets its own three vertices so jumps
/// survive. Point data holds the field at the cell corners.
void write_vtk_field(const fs::path& path, const DgField& field, const std::string& name);

/// Point cloud (e.g. membrane quadrature points) with one scalar per point.
void write_vtk_points(const fs::path& path, std::span<const Point2> points, std::span<const double> values,
                      const std::string& name);

/// MatrixMarket coordinate real general, 1-based indices, full precision.
void write_matrix_market(const fs::path& path, const CsrMatrix& a);
void write_matrix_market(std::ostream& os, const CsrMatrix& a);
/// Accepts "general" and "symmetric" real coordinate files.
CsrMatrix read_matrix_market(const fs::path& path);
CsrMatrix read_matrix_market(std::istream& is, const std::string& source = "<stream>");

/// Splits a CSV line on commas; no quoting.
std::vector<std::string> split_csv(const std::string& line);

/// Header plus rows, read whole.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws IoError if absent.
  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(const fs::path& path);

}  // namespace knpemi::io
