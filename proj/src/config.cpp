#include "dafo/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dafo/errors.hpp"
#include "dafo/integrate.hpp"

namespace dafo {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double to_double(const std::string& value, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParseError("config key '" + key + "': expected number, got '" +
                     value + "'");
  }
}

int to_int(const std::string& value, const std::string& key) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParseError("config key '" + key + "': expected integer, got '" +
                     value + "'");
  }
}

bool to_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ParseError("config key '" + key + "': expected boolean, got '" +
                   value + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/// Per-element parameter: plain number broadcasts, "file:PATH" reads one
/// value per line.
std::vector<double> resolve_param(const std::string& spec,
                                  const std::string& key, int num_elements,
                                  const std::string& base_dir) {
  if (spec.rfind("file:", 0) == 0) {
    std::string path = spec.substr(5);
    if (!base_dir.empty() && !path.empty() && path[0] != '/')
      path = base_dir + "/" + path;
    std::ifstream in(path);
    if (!in)
      throw ParseError("config key '" + key + "': cannot open '" + path + "'");
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
      if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
      line = trim(line);
      if (line.empty()) continue;
      values.push_back(to_double(line, key));
    }
    if (static_cast<int>(values.size()) != num_elements)
      throw ParseError("config key '" + key + "': file '" + path + "' has " +
                       std::to_string(values.size()) + " values, expected " +
                       std::to_string(num_elements));
    return values;
  }
  return {to_double(spec, key)};
}

}  // namespace

Variant parse_variant(const std::string& name) {
  if (name == "flux-only") return Variant::FluxOnly;
  if (name == "closed-form") return Variant::ClosedForm;
  if (name == "coupled") return Variant::Coupled;
  throw ParseError("unknown variant '" + name +
                   "' (expected flux-only, closed-form or coupled)");
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError("config line " + std::to_string(lineno) +
                         ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) +
                       ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string qual = section.empty() ? key : section + "." + key;

    if (qual == "mesh.source") c.mesh = value;
    else if (qual == "mesh.extent") {
      std::istringstream vs(value);
      if (!(vs >> c.extent.x0 >> c.extent.y0 >> c.extent.x1 >> c.extent.y1))
        throw ParseError("config key 'mesh.extent': expected four numbers");
    }
    else if (qual == "physics.phi") c.phi = value;
    else if (qual == "physics.k") c.k = value;
    else if (qual == "physics.beta_fo") c.beta_fo = value;
    else if (qual == "physics.mu") c.mu = value;
    else if (qual == "physics.W") c.W = value;
    else if (qual == "physics.Theta") c.Theta = value;
    else if (qual == "physics.R0") c.R0 = to_double(value, qual);
    else if (qual == "problem.g") c.g = value;
    else if (qual == "problem.f") c.f = value;
    else if (qual == "time.dt") c.dt = to_double(value, qual);
    else if (qual == "time.steps") c.steps = to_int(value, qual);
    else if (qual == "time.p0") c.p0 = value;
    else if (qual == "time.p0_physical") c.p0_physical = to_bool(value, qual);
    else if (qual == "solver.variant") c.variant = value;
    else if (qual == "solver.linear") c.linear = value;
    else if (qual == "newton.abs_tol") c.abs_tol = to_double(value, qual);
    else if (qual == "newton.rel_tol") c.rel_tol = to_double(value, qual);
    else if (qual == "newton.max_iter") c.max_iter = to_int(value, qual);
    else if (qual == "newton.local_abs_tol")
      c.local_abs_tol = to_double(value, qual);
    else if (qual == "newton.local_max_iter")
      c.local_max_iter = to_int(value, qual);
    else if (qual == "law.tau_g") c.tau_g = to_double(value, qual);
    else if (qual == "law.eps_p") c.eps_p = to_double(value, qual);
    else if (qual == "output.dir") c.output_dir = value;
    else if (qual == "output.vtk") c.vtk = to_bool(value, qual);
    else if (qual == "output.per_step") c.per_step = to_bool(value, qual);
    else
      throw ParseError("config line " + std::to_string(lineno) +
                       ": unknown key '" + qual + "'");
  }

  if (c.dt <= 0.0) throw ParseError("config: time.dt must be positive");
  if (c.steps < 1) throw ParseError("config: time.steps must be >= 1");
  parse_variant(c.variant);
  if (c.linear != "direct" && c.linear != "cg")
    throw ParseError("config: solver.linear must be 'direct' or 'cg'");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  os << "[mesh]\n"
     << "source = " << c.mesh << "\n"
     << "extent = " << fmt(c.extent.x0) << " " << fmt(c.extent.y0) << " "
     << fmt(c.extent.x1) << " " << fmt(c.extent.y1) << "\n"
     << "\n[physics]\n"
     << "phi = " << c.phi << "\n"
     << "k = " << c.k << "\n"
     << "beta_fo = " << c.beta_fo << "\n"
     << "mu = " << c.mu << "\n"
     << "W = " << c.W << "\n"
     << "Theta = " << c.Theta << "\n"
     << "R0 = " << fmt(c.R0) << "\n"
     << "\n[problem]\n"
     << "g = " << c.g << "\n"
     << "f = " << c.f << "\n"
     << "\n[time]\n"
     << "dt = " << fmt(c.dt) << "\n"
     << "steps = " << c.steps << "\n"
     << "p0 = " << c.p0 << "\n"
     << "p0_physical = " << (c.p0_physical ? "true" : "false") << "\n"
     << "\n[solver]\n"
     << "variant = " << c.variant << "\n"
     << "linear = " << c.linear << "\n"
     << "\n[newton]\n"
     << "abs_tol = " << fmt(c.abs_tol) << "\n"
     << "rel_tol = " << fmt(c.rel_tol) << "\n"
     << "max_iter = " << c.max_iter << "\n"
     << "local_abs_tol = " << fmt(c.local_abs_tol) << "\n"
     << "local_max_iter = " << c.local_max_iter << "\n"
     << "\n[law]\n"
     << "tau_g = " << fmt(c.tau_g) << "\n"
     << "eps_p = " << fmt(c.eps_p) << "\n"
     << "\n[output]\n"
     << "dir = " << c.output_dir << "\n"
     << "vtk = " << (c.vtk ? "true" : "false") << "\n"
     << "per_step = " << (c.per_step ? "true" : "false") << "\n";
  return os.str();
}

std::vector<double> RunSetup::initial_pressure() const {
  const Expression& expr = p0;
  const bool physical = p0_physical;
  return element_means(mesh, quad_points(5), [&](const Vec2& x) {
    const double v = expr(x.x(), x.y(), 0.0);
    return physical ? std::abs(v) * v : v;  // p = |P| P
  });
}

RunSetup materialize(const RunConfig& config, const std::string& base_dir) {
  Mesh mesh = [&] {
    if (config.mesh.rfind("structured:", 0) == 0) {
      const int n = to_int(config.mesh.substr(11), "mesh.source");
      return Mesh::structured(n, config.extent);
    }
    if (config.mesh.rfind("file:", 0) == 0) {
      std::string path = config.mesh.substr(5);
      if (!base_dir.empty() && !path.empty() && path[0] != '/')
        path = base_dir + "/" + path;
      return Mesh::load(path);
    }
    throw ParseError("config key 'mesh.source': expected structured:N or "
                     "file:PATH, got '" +
                     config.mesh + "'");
  }();

  const int nt = mesh.num_triangles();
  PhysicalParams params;
  params.porosity = resolve_param(config.phi, "physics.phi", nt, base_dir);
  params.permeability = resolve_param(config.k, "physics.k", nt, base_dir);
  params.forchheimer =
      resolve_param(config.beta_fo, "physics.beta_fo", nt, base_dir);
  params.viscosity = resolve_param(config.mu, "physics.mu", nt, base_dir);
  params.molar_weight = resolve_param(config.W, "physics.W", nt, base_dir);
  params.temperature =
      resolve_param(config.Theta, "physics.Theta", nt, base_dir);
  params.gas_constant = config.R0;

  RunSetup setup{
      .mesh = std::move(mesh),
      .coefficients = derive_coefficients(params, nt, config.dt),
      .law = {.tau_g = config.tau_g, .eps_p = config.eps_p},
      .g = Expression::parse(config.g),
      .f = Expression::parse(config.f),
      .p0 = Expression::parse(config.p0),
      .p0_physical = config.p0_physical,
      .variant = parse_variant(config.variant),
      .linear_direct = config.linear == "direct",
  };
  return setup;
}

}  // namespace dafo
