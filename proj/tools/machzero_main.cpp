#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "machzero/cli.hpp"

namespace {

struct SubArgs {
  std::string config;
  std::string out;
  bool vtk = false;
};

void attach_common(CLI::App* sub, SubArgs* args) {
  sub->add_option("--config", args->config, "run configuration file")
      ->required();
  sub->add_option("--out", args->out, "output directory (overrides config)");
  sub->add_flag("--vtk", args->vtk, "also write a legacy-ASCII VTK dump");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"machzero: steady potential flow in infinitely long nozzles"};
  app.require_subcommand(1);

  SubArgs inc, cmp, seps, slen, chk;
  attach_common(app.add_subcommand("solve-incompressible",
                                   "solve the incompressible problem"),
                &inc);
  attach_common(app.add_subcommand("solve-compressible",
                                   "solve the truncated compressible problem"),
                &cmp);
  attach_common(app.add_subcommand("sweep-eps",
                                   "compressibility sweep with rate fits"),
                &seps);
  attach_common(app.add_subcommand("sweep-L", "domain truncation sweep"),
                &slen);
  attach_common(app.add_subcommand("check", "run the verification suite"),
                &chk);

  CLI11_PARSE(app, argc, argv);

  using machzero::Command;
  try {
    if (app.got_subcommand("solve-incompressible")) {
      const auto cfg = machzero::parse_config(
          inc.config, Command::solve_incompressible);
      return machzero::cmd_solve_incompressible(
          cfg, inc.out.empty() ? cfg.output_dir : inc.out, inc.vtk);
    }
    if (app.got_subcommand("solve-compressible")) {
      const auto cfg =
          machzero::parse_config(cmp.config, Command::solve_compressible);
      return machzero::cmd_solve_compressible(
          cfg, cmp.out.empty() ? cfg.output_dir : cmp.out, cmp.vtk);
    }
    if (app.got_subcommand("sweep-eps")) {
      const auto cfg = machzero::parse_config(seps.config, Command::sweep_eps);
      return machzero::cmd_sweep_eps(
          cfg, seps.out.empty() ? cfg.output_dir : seps.out);
    }
    if (app.got_subcommand("sweep-L")) {
      const auto cfg = machzero::parse_config(slen.config, Command::sweep_L);
      return machzero::cmd_sweep_L(
          cfg, slen.out.empty() ? cfg.output_dir : slen.out);
    }
    const auto cfg = machzero::parse_config(chk.config, Command::check);
    return machzero::cmd_check(
        cfg, chk.out.empty() ? cfg.output_dir : chk.out);
  } catch (const std::exception& err) {
    const std::string what = err.what();
    const bool config_error = what.rfind("config error:", 0) == 0;
    std::cerr << "error: " << (config_error ? "config" : "run") << ": "
              << what << "\n";
    return config_error ? 2 : 1;
  }
}
