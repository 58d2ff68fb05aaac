#include <iostream>

#include <CLI11.hpp>

#include "hyperboloidal/cli.hpp"
#include "hyperboloidal/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"CMC shear-free hyperboloidal initial data"};
  app.require_subcommand(1);

  hyp::CliOptions opts;
  std::string mode;
  int grid_n = 0;
  for (const char* name : {"solve", "verify", "identities", "convergence"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config_path, "config file")->required();
    sub->add_option("--out", opts.out_dir, "output directory")->required();
    sub->add_option("--grid-n", grid_n, "override [grid] n");
    sub->add_option("--mode", mode, "override [pipeline] mode")->check(CLI::IsMember({"shearfree", "weak"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : hyp::kExitConfigError;
  }

  const CLI::App* sub = app.get_subcommands().front();
  opts.command = hyp::parse_command(sub->get_name());
  if (sub->count("--grid-n")) opts.grid_n = grid_n;
  if (sub->count("--mode")) opts.mode = mode;
  return hyp::run_command(opts, std::cout);
}
