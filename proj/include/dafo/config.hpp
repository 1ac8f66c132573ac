#ifndef DAFO_CONFIG_HPP
#define DAFO_CONFIG_HPP

#include <string>
#include <vector>

#include "dafo/condense.hpp"
#include "dafo/constitutive.hpp"
#include "dafo/expression.hpp"
#include "dafo/mesh.hpp"

namespace dafo {

/// Full run description parsed from the sectioned key=value config text.
/// Physical parameters hold either a number or "file:PATH" with one value
/// per element; expressions are strings in the x/y/t grammar.
struct RunConfig {
  // [mesh]
  std::string mesh = "structured:4";  // structured:N | file:PATH
  Rect extent{0.0, 0.0, 1.0, 1.0};

  // [physics]
  std::string phi = "0.3";
  std::string k = "1";
  std::string beta_fo = "0";
  std::string mu = "0.5";
  std::string W = "8.31446261815324";
  std::string Theta = "1";
  double R0 = 8.31446261815324;

  // [problem]
  std::string g = "0";  // Dirichlet datum for the transformed pressure
  std::string f = "0";  // source f_tilde

  // [time]
  double dt = 1.0;
  int steps = 1;
  std::string p0 = "0";       // initial transformed pressure p = |P| P
  bool p0_physical = false;   // interpret p0 as physical P and transform

  // [solver]
  std::string variant = "closed-form";
  std::string linear = "direct";

  // [newton]
  double abs_tol = 1e-11;
  double rel_tol = 0.0;
  int max_iter = 25;
  double local_abs_tol = 1e-13;
  int local_max_iter = 25;

  // [law]
  double tau_g = 1e-2;
  double eps_p = 1e-10;

  // [output]
  std::string output_dir = "out";
  bool vtk = false;
  bool per_step = false;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical text form; parse(serialize(c)) == c and serialization is
/// idempotent.
std::string serialize_config(const RunConfig& config);

Variant parse_variant(const std::string& name);

/// Materialized run: mesh, derived coefficients and compiled expressions.
struct RunSetup {
  Mesh mesh;
  Coefficients coefficients;
  LawConfig law;
  Expression g;
  Expression f;
  Expression p0;
  bool p0_physical = false;
  Variant variant;
  bool linear_direct = true;

  std::vector<double> initial_pressure() const;  // element means of p0
};

/// Build the mesh, resolve per-element parameter files against it and
/// derive the coefficients. Paths in "file:" values resolve relative to
/// `base_dir` when given.
RunSetup materialize(const RunConfig& config, const std::string& base_dir = "");

}  // namespace dafo

#endif
