#include "dafo/exportout.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace dafo {

namespace {

// 17 significant digits reproduce doubles exactly.
void put(std::FILE* f, double v, char sep) { std::fprintf(f, "%.17g%c", v, sep); }

std::FILE* open_or_throw(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  return f;
}

}  // namespace

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory '" + dir +
                             "': " + ec.message());
}

std::string export_fields(const Problem& problem, const HybridState& state,
                          const std::string& dir, const std::string& suffix) {
  ensure_directory(dir);
  const Mesh& mesh = problem.mesh();
  const FieldOutput fields = recover_fields(problem, state);

  const std::string ppath = dir + "/p" + suffix + ".csv";
  std::FILE* f = open_or_throw(ppath);
  std::fprintf(f, "elem,cx,cy,p,P\n");
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const Vec2 c = mesh.centroid(k);
    std::fprintf(f, "%d,", k);
    put(f, c.x(), ',');
    put(f, c.y(), ',');
    put(f, fields.cell_p[k], ',');
    put(f, fields.cell_P[k], '\n');
  }
  std::fclose(f);

  const std::string fpath = dir + "/flux" + suffix + ".csv";
  f = open_or_throw(fpath);
  std::fprintf(f, "edge,mx,my,nx,ny,v\n");
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Vec2 m = mesh.edge_midpoint(e);
    const Vec2& n = mesh.edge_normal[e];
    std::fprintf(f, "%d,", e);
    put(f, m.x(), ',');
    put(f, m.y(), ',');
    put(f, n.x(), ',');
    put(f, n.y(), ',');
    put(f, fields.edge_flux[e], '\n');
  }
  std::fclose(f);
  return ppath;
}

std::string export_convergence_log(const std::vector<NewtonTraceEntry>& trace,
                                   const std::string& dir,
                                   const std::string& suffix) {
  ensure_directory(dir);
  const std::string path = dir + "/log" + suffix + ".csv";
  std::FILE* f = open_or_throw(path);
  std::fprintf(f, "iteration,residual,step\n");
  for (const auto& row : trace) {
    std::fprintf(f, "%d,", row.iteration);
    put(f, row.residual, ',');
    put(f, row.step, '\n');
  }
  std::fclose(f);
  return path;
}

std::string export_vtk(const Problem& problem, const HybridState& state,
                       const std::string& dir, const std::string& suffix) {
  ensure_directory(dir);
  const Mesh& mesh = problem.mesh();
  const FieldOutput fields = recover_fields(problem, state);

  const std::string path = dir + "/fields" + suffix + ".vtk";
  std::FILE* f = open_or_throw(path);
  std::fprintf(f, "# vtk DataFile Version 3.0\n");
  std::fprintf(f, "hybridized mixed FEM cell fields\n");
  std::fprintf(f, "ASCII\n");
  std::fprintf(f, "DATASET UNSTRUCTURED_GRID\n");
  std::fprintf(f, "POINTS %d double\n", mesh.num_vertices());
  for (const auto& v : mesh.vertices)
    std::fprintf(f, "%.17g %.17g 0\n", v.x(), v.y());
  std::fprintf(f, "CELLS %d %d\n", mesh.num_triangles(),
               4 * mesh.num_triangles());
  for (const auto& t : mesh.triangles)
    std::fprintf(f, "3 %d %d %d\n", t[0], t[1], t[2]);
  std::fprintf(f, "CELL_TYPES %d\n", mesh.num_triangles());
  for (int k = 0; k < mesh.num_triangles(); ++k) std::fprintf(f, "5\n");
  std::fprintf(f, "CELL_DATA %d\n", mesh.num_triangles());
  std::fprintf(f, "SCALARS pressure double 1\nLOOKUP_TABLE default\n");
  for (double v : fields.cell_p) std::fprintf(f, "%.17g\n", v);
  std::fprintf(f, "SCALARS pressure_physical double 1\nLOOKUP_TABLE default\n");
  for (double v : fields.cell_P) std::fprintf(f, "%.17g\n", v);
  std::fprintf(f, "VECTORS velocity double\n");
  for (const auto& v : fields.cell_velocity)
    std::fprintf(f, "%.17g %.17g 0\n", v.x(), v.y());
  std::fclose(f);
  return path;
}

}  // namespace dafo
