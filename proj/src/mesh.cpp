#include "dafo/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "dafo/errors.hpp"

namespace dafo {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) -
                (c.x() - a.x()) * (b.y() - a.y()));
}

// Strip '#' comments, return whitespace-separated tokens.
std::vector<std::string> tokenize(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  return tokens;
}

}  // namespace

Mesh Mesh::structured(int n, const Rect& extent) {
  if (n < 1) throw ParseError("structured mesh requires n >= 1");
  if (!(extent.x1 > extent.x0) || !(extent.y1 > extent.y0))
    throw ParseError("structured mesh extent must have positive size");

  Mesh mesh;
  const double hx = (extent.x1 - extent.x0) / n;
  const double hy = (extent.y1 - extent.y0) / n;
  mesh.vertices.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.vertices.emplace_back(extent.x0 + i * hx, extent.y0 + j * hy);

  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  mesh.triangles.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int ll = vid(i, j), lr = vid(i + 1, j);
      const int ul = vid(i, j + 1), ur = vid(i + 1, j + 1);
      // diagonal of positive slope: ll -- ur
      mesh.triangles.push_back({ll, lr, ur});
      mesh.triangles.push_back({ll, ur, ul});
    }
  }
  mesh.build_topology("structured:" + std::to_string(n));
  return mesh;
}

Mesh Mesh::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file '" + path + "'");
  return read(in, path);
}

Mesh Mesh::read(std::istream& in, const std::string& origin) {
  const auto tokens = tokenize(in);
  std::size_t pos = 0;
  auto next = [&](const char* what) -> const std::string& {
    if (pos >= tokens.size())
      throw ParseError(origin + ": unexpected end of file while reading " +
                       std::string(what));
    return tokens[pos++];
  };
  auto next_int = [&](const char* what) {
    const std::string& tok = next(what);
    try {
      std::size_t used = 0;
      long v = std::stol(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return static_cast<int>(v);
    } catch (const std::exception&) {
      throw ParseError(origin + ": expected integer for " + std::string(what) +
                       ", got '" + tok + "'");
    }
  };
  auto next_double = [&](const char* what) {
    const std::string& tok = next(what);
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw ParseError(origin + ": expected number for " + std::string(what) +
                       ", got '" + tok + "'");
    }
  };

  Mesh mesh;
  if (next("header") != "vertices")
    throw ParseError(origin + ": expected 'vertices N' header");
  const int nv = next_int("vertex count");
  if (nv < 3) throw ParseError(origin + ": need at least 3 vertices");
  mesh.vertices.reserve(nv);
  for (int i = 0; i < nv; ++i) {
    const double x = next_double("vertex x");
    const double y = next_double("vertex y");
    mesh.vertices.emplace_back(x, y);
  }
  if (next("header") != "triangles")
    throw ParseError(origin + ": expected 'triangles M' header");
  const int nt = next_int("triangle count");
  if (nt < 1) throw ParseError(origin + ": need at least 1 triangle");
  mesh.triangles.reserve(nt);
  for (int k = 0; k < nt; ++k) {
    std::array<int, 3> t;
    for (int j = 0; j < 3; ++j) {
      t[j] = next_int("triangle vertex id");
      if (t[j] < 0 || t[j] >= nv)
        throw ParseError(origin + ": triangle " + std::to_string(k) +
                         " references vertex " + std::to_string(t[j]) +
                         " out of range");
    }
    mesh.triangles.push_back(t);
  }
  if (pos != tokens.size())
    throw ParseError(origin + ": trailing garbage after triangle list");

  mesh.build_topology(origin);
  return mesh;
}

void Mesh::build_topology(const std::string& origin) {
  const int nt = num_triangles();

  // Bounding box sets the degeneracy scale.
  double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& v : vertices) {
    xmin = std::min(xmin, v.x());
    xmax = std::max(xmax, v.x());
    ymin = std::min(ymin, v.y());
    ymax = std::max(ymax, v.y());
  }
  const double bbox_area = (xmax - xmin) * (ymax - ymin);

  tri_area.resize(nt);
  for (int k = 0; k < nt; ++k) {
    auto& t = triangles[k];
    double area = signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
    if (area < 0.0) {  // clockwise input: flip
      std::swap(t[1], t[2]);
      area = -area;
    }
    if (area <= 1e-14 * bbox_area)
      throw TopologyError(origin + ": triangle " + std::to_string(k) +
                          " is degenerate (area " + std::to_string(area) + ")");
    tri_area[k] = area;
  }

  // Deduplicate edges by sorted vertex pair; map gives deterministic ids.
  std::map<std::array<int, 2>, int> edge_id;
  for (const auto& t : triangles) {
    for (int i = 0; i < 3; ++i) {
      std::array<int, 2> key{t[(i + 1) % 3], t[(i + 2) % 3]};
      if (key[0] > key[1]) std::swap(key[0], key[1]);
      edge_id.try_emplace(key, 0);
    }
  }
  edges.clear();
  edges.reserve(edge_id.size());
  for (auto& [key, id] : edge_id) {
    id = static_cast<int>(edges.size());
    edges.push_back(key);
  }

  edge_normal.resize(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Vec2 d = vertices[edges[e][1]] - vertices[edges[e][0]];
    const double len = d.norm();
    if (len <= 0.0)
      throw TopologyError(origin + ": zero-length edge " + std::to_string(e));
    edge_normal[e] = Vec2(d.y(), -d.x()) / len;  // rotate -90 degrees
  }

  edge_tris.assign(edges.size(), {-1, -1});
  tri_edges.resize(nt);
  tri_edge_sign.resize(nt);
  for (int k = 0; k < nt; ++k) {
    const auto& t = triangles[k];
    for (int i = 0; i < 3; ++i) {
      const int a = t[(i + 1) % 3], b = t[(i + 2) % 3];
      std::array<int, 2> key{std::min(a, b), std::max(a, b)};
      const int e = edge_id.at(key);
      tri_edges[k][i] = e;

      // Outward normal of the local edge (CCW triangle, -90 rotation of a->b).
      const Vec2 d = vertices[b] - vertices[a];
      const Vec2 n_out = Vec2(d.y(), -d.x()).normalized();
      const double s = n_out.dot(edge_normal[e]) > 0.0 ? 1.0 : -1.0;
      tri_edge_sign[k][i] = s;

      auto& adj = edge_tris[e];
      if (adj[0] < 0) {
        adj[0] = k;
      } else if (adj[1] < 0) {
        // Conformity: the two sides must see opposite orientations.
        const int other = adj[0];
        const int li = [&] {
          for (int j = 0; j < 3; ++j)
            if (tri_edges[other][j] == e) return j;
          return -1;
        }();
        if (li < 0 || tri_edge_sign[other][li] == s)
          throw TopologyError(origin + ": edge " + std::to_string(e) +
                              " has inconsistent orientation (overlapping or "
                              "repeated triangles)");
        adj[1] = k;
      } else {
        throw TopologyError(origin + ": edge " + std::to_string(e) +
                            " shared by more than two triangles");
      }
    }
  }

  interior_edges.clear();
  boundary_edges.clear();
  for (int e = 0; e < num_edges(); ++e)
    (is_boundary_edge(e) ? boundary_edges : interior_edges).push_back(e);

  // Simply connected polygonal domain: V - E + T = 1. Rejects holes and
  // disconnected or overlapping input that slipped past the edge checks.
  if (num_vertices() - num_edges() + num_triangles() != 1)
    throw TopologyError(origin + ": mesh is not a simply connected domain (V-E+T = " +
                        std::to_string(num_vertices() - num_edges() + num_triangles()) +
                        ")");
}

int Mesh::local_edge_index(int k, int e) const {
  for (int i = 0; i < 3; ++i)
    if (tri_edges[k][i] == e) return i;
  throw std::out_of_range("edge " + std::to_string(e) + " not in triangle " +
                          std::to_string(k));
}

Vec2 Mesh::centroid(int k) const {
  const auto& t = triangles[k];
  return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
}

Vec2 Mesh::edge_midpoint(int e) const {
  return 0.5 * (vertices[edges[e][0]] + vertices[edges[e][1]]);
}

double Mesh::edge_length(int e) const {
  return (vertices[edges[e][1]] - vertices[edges[e][0]]).norm();
}

std::array<Vec2, 3> Mesh::triangle_vertices(int k) const {
  const auto& t = triangles[k];
  return {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
}

}  // namespace dafo
