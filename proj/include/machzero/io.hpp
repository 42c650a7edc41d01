#ifndef MACHZERO_IO_HPP_
#define MACHZERO_IO_HPP_

#include <string>
#include <utility>
#include <vector>

#include "machzero/fem.hpp"
#include "machzero/flow_state.hpp"
#include "machzero/limit_lab.hpp"

namespace machzero {

/// Shortest round-trip decimal representation of a double, so identical runs
/// produce byte-identical files.
std::string fmt_double(double v);

/// Plain-text field dump:
///   machzero-field v1 <nnodes> <nelems>
///   x y value                (per node)
///   n0 n1 n2 n3              (per element)
///   u / rho / p / mach       (labeled per-quadrature-point blocks)
void write_field_dump(const std::string& path, const ScalarField& field,
                      const FlowState& state);

/// Legacy-ASCII VTK export (unstructured grid, cell-averaged derived
/// fields) for external viewers.
void write_vtk(const std::string& path, const ScalarField& field,
               const FlowState& state);

/// One row per sweep parameter, fixed column set.
void write_sweep_csv(const std::string& path, const SweepReport& report);

using SummaryLines = std::vector<std::pair<std::string, std::string>>;

/// key = value lines; also mirrored to stdout by the CLI.
void write_summary(const std::string& path, const SummaryLines& lines);

std::string sweep_summary_text(const SweepReport& report);

}  // namespace machzero

#endif  // MACHZERO_IO_HPP_
