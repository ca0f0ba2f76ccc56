// rdlab: batch driver for the random-perturbation laboratory.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rdlab/cli.hpp"
#include "rdlab/errors.hpp"

int main(int argc, char** argv) {
  namespace cli = rdlab::cli;
  CLI::App app{"rdlab: stationary measures, invariant domains and basins of randomly perturbed maps"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::vector<std::string> overrides;
  cli::RunOptions options;
  std::string out_dir;

  for (const auto& name : cli::subcommand_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "flat key=value config file");
    sub->add_option("-s,--set", overrides, "override key=value (repeatable)");
    sub->add_option("-t,--threads", options.threads, "worker threads (0 = all cores)");
    sub->add_option("-o,--out", out_dir, "output directory (default $RDLAB_OUT or ./rdlab_out)");
    sub->add_flag("--assert", options.assert_thresholds, "exit 4 when a documented threshold fails");
    sub->add_flag("-q,--quiet", options.quiet, "no summary on stdout");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigError;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  cli::Config config;
  try {
    if (!config_path.empty()) config = cli::Config::from_file(config_path);
    for (const auto& o : overrides) config.assign(o);
  } catch (const rdlab::ConfigError& e) {
    std::cerr << "rdlab: " << e.what() << '\n';
    return cli::kConfigError;
  }
  options.out_dir = out_dir;
  return cli::run_subcommand(name, config, options);
}
