#ifndef DAFO_EXPORTOUT_HPP
#define DAFO_EXPORTOUT_HPP

#include <string>
#include <vector>

#include "dafo/globalsys.hpp"
#include "dafo/mesh.hpp"

namespace dafo {

/// Write p.csv ("elem,cx,cy,p,P") and flux.csv ("edge,mx,my,nx,ny,v") into
/// `dir`, with 17-significant-digit floats. `suffix` tags per-step exports
/// (p_0003.csv). Returns the p.csv path.
std::string export_fields(const Problem& problem, const HybridState& state,
                          const std::string& dir,
                          const std::string& suffix = "");

/// Write the Newton convergence log as log.csv ("iteration,residual,step").
std::string export_convergence_log(const std::vector<NewtonTraceEntry>& trace,
                                   const std::string& dir,
                                   const std::string& suffix = "");

/// Legacy ASCII VTK unstructured grid with cell pressure (transformed and
/// physical) and cell velocity.
std::string export_vtk(const Problem& problem, const HybridState& state,
                       const std::string& dir,
                       const std::string& suffix = "");

void ensure_directory(const std::string& dir);

}  // namespace dafo

#endif
