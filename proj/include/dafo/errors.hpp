#ifndef DAFO_ERRORS_HPP
#define DAFO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dafo {

/// Malformed input text (mesh files, config files, expressions).
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Mesh violates conformity requirements (edge shared by >2 triangles,
/// zero-area element, non simply connected domain, ...).
class TopologyError : public std::runtime_error {
public:
  explicit TopologyError(const std::string& what) : std::runtime_error(what) {}
};

/// A local or global Newton iteration hit its iteration cap.
class NewtonDiverged : public std::runtime_error {
public:
  NewtonDiverged(const std::string& what, double last_residual, int iterations)
      : std::runtime_error(what),
        last_residual(last_residual),
        iterations(iterations) {}

  double last_residual;
  int iterations;
};

/// A local Jacobian (or the global sparse matrix) is numerically singular.
class SingularMatrixError : public std::runtime_error {
public:
  explicit SingularMatrixError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace dafo

#endif
