#ifndef MACHZERO_CLI_HPP_
#define MACHZERO_CLI_HPP_

#include <string>

#include "machzero/config.hpp"

namespace machzero {

/// Command entry points; each writes its output files under `outdir`
/// (created if absent), mirrors the summary to stdout, and returns the
/// process exit status.
int cmd_solve_incompressible(const RunConfig& cfg, const std::string& outdir,
                             bool vtk);
int cmd_solve_compressible(const RunConfig& cfg, const std::string& outdir,
                           bool vtk);
int cmd_sweep_eps(const RunConfig& cfg, const std::string& outdir);
int cmd_sweep_L(const RunConfig& cfg, const std::string& outdir);
int cmd_check(const RunConfig& cfg, const std::string& outdir);

}  // namespace machzero

#endif  // MACHZERO_CLI_HPP_
