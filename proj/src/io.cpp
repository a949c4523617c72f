#include "knpemi/io.hpp"

#include <iomanip>
#include <sstream>

namespace knpemi::io {

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

void write_header(std::ostream& os, const std::string& title) {
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
}

}  // namespace

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) ensure_directory(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << std::setprecision(17);
  return out;
}

void write_vtk_mesh(const fs::path& path, const Mesh2D& mesh) {
  auto out = open_output(path);
  write_header(out, "mesh");
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (Index v = 0; v < mesh.num_vertices(); ++v) out << mesh.vertex(v).x << ' ' << mesh.vertex(v).y << " 0\n";
  out << "CELLS " << mesh.num_cells() << ' ' << 4 * mesh.num_cells() << '\n';
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cell(c);
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  out << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (Index c = 0; c < mesh.num_cells(); ++c) out << "5\n";
  out << "CELL_DATA " << mesh.num_cells() << "\nSCALARS tag int 1\nLOOKUP_TABLE default\n";
  for (Index c = 0; c < mesh.num_cells(); ++c) out << mesh.cell_tag(c) << '\n';
  finish(out, path);
}

void write_vtk_field(const fs::path& path, const DgField& field, const std::string& name) {
  const DgSpace& space = field.space();
  const Mesh2D& mesh = space.mesh();
  const Index nc = mesh.num_cells();
  auto out = open_output(path);
  write_header(out, name);
  out << "POINTS " << 3 * nc << " double\n";
  for (Index c = 0; c < nc; ++c) {
    for (Index v : mesh.cell(c)) out << mesh.vertex(v).x << ' ' << mesh.vertex(v).y << " 0\n";
  }
  out << "CELLS " << nc << ' ' << 4 * nc << '\n';
  for (Index c = 0; c < nc; ++c) out << "3 " << 3 * c << ' ' << 3 * c + 1 << ' ' << 3 * c + 2 << '\n';
  out << "CELL_TYPES " << nc << '\n';
  for (Index c = 0; c < nc; ++c) out << "5\n";
  out << "POINT_DATA " << 3 * nc << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  // reference vertices (0,0), (1,0), (0,1) are local nodes 0..2 for every degree
  const std::span<const Point2> ref = reference_nodes(space.degree());
  for (Index c = 0; c < nc; ++c) {
    for (int i = 0; i < 3; ++i) out << field.eval(c, ref[i]) << '\n';
  }
  out << "CELL_DATA " << nc << "\nSCALARS tag int 1\nLOOKUP_TABLE default\n";
  for (Index c = 0; c < nc; ++c) out << mesh.cell_tag(c) << '\n';
  finish(out, path);
}

void write_vtk_points(const fs::path& path, std::span<const Point2> points, std::span<const double> values,
                      const std::string& name) {
  if (points.size() != values.size()) throw IoError("point and value counts differ for " + path.string());
  const std::size_t n = points.size();
  auto out = open_output(path);
  write_header(out, name);
  out << "POINTS " << n << " double\n";
  for (Point2 p : points) out << p.x << ' ' << p.y << " 0\n";
  out << "CELLS " << n << ' ' << 2 * n << '\n';
  for (std::size_t i = 0; i < n; ++i) out << "1 " << i << '\n';
  out << "CELL_TYPES " << n << '\n';
  for (std::size_t i = 0; i < n; ++i) out << "1\n";
  out << "POINT_DATA " << n << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double v : values) out << v << '\n';
  finish(out, path);
}

void write_matrix_market(std::ostream& os, const CsrMatrix& a) {
  const auto flags = os.flags();
  const auto prec = os.precision(17);
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  const auto rp = a.row_ptr();
  const auto col = a.col();
  const auto val = a.values();
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index k = rp[i]; k < rp[i + 1]; ++k) os << i + 1 << ' ' << col[k] + 1 << ' ' << val[k] << '\n';
  }
  os.precision(prec);
  os.flags(flags);
}

void write_matrix_market(const fs::path& path, const CsrMatrix& a) {
  auto out = open_output(path);
  write_matrix_market(out, a);
  finish(out, path);
}

CsrMatrix read_matrix_market(std::istream& is, const std::string& source) {
  std::string line;
  if (!std::getline(is, line)) throw IoError(source + ": empty MatrixMarket input");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket" || object != "matrix" || format != "coordinate") {
    throw IoError(source + ": expected a MatrixMarket coordinate matrix");
  }
  if (field != "real" && field != "double" && field != "integer") throw IoError(source + ": unsupported field " + field);
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general") throw IoError(source + ": unsupported symmetry " + symmetry);

  long rows = -1, cols = -1, entries = -1;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '%') continue;
    std::istringstream dims(line);
    if (!(dims >> rows >> cols >> entries) || rows < 0 || cols < 0 || entries < 0) {
      throw IoError(source + ": malformed size line");
    }
    break;
  }
  if (rows < 0) throw IoError(source + ": missing size line");
  std::vector<Index> r, c;
  std::vector<double> v;
  r.reserve(entries);
  c.reserve(entries);
  v.reserve(entries);
  for (long e = 0; e < entries; ++e) {
    long i = 0, j = 0;
    double x = 0.0;
    if (!(is >> i >> j >> x)) throw IoError(source + ": truncated after " + std::to_string(e) + " entries");
    if (i < 1 || i > rows || j < 1 || j > cols) throw IoError(source + ": index out of range in entry " + std::to_string(e + 1));
    r.push_back(static_cast<Index>(i - 1));
    c.push_back(static_cast<Index>(j - 1));
    v.push_back(x);
    if (symmetric && i != j) {
      r.push_back(static_cast<Index>(j - 1));
      c.push_back(static_cast<Index>(i - 1));
      v.push_back(x);
    }
  }
  return CsrMatrix::from_triplets(static_cast<Index>(rows), static_cast<Index>(cols), r, c, v);
}

CsrMatrix read_matrix_market(const fs::path& path) {
  auto in = open_input(path);
  return read_matrix_market(in, path.string());
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw IoError("CSV column not found: " + name);
}

CsvTable read_csv(const fs::path& path) {
  auto in = open_input(path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV file: " + path.string());
  t.header = split_csv(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split_csv(line));
    if (t.rows.back().size() != t.header.size()) {
      throw IoError(path.string() + ": row " + std::to_string(t.rows.size()) + " has a different column count");
    }
  }
  return t;
}

}  // namespace knpemi::io
