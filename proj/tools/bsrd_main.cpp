#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bsrd/run_config.hpp"
#include "bsrd/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"bsrd: coupled bulk-surface reaction-diffusion toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
      seed_set = true;
    });
  };

  CLI::App* cmd_check = app.add_subcommand(
      "check", "sample the global-existence hypotheses and report a verdict");
  CLI::App* cmd_simulate =
      app.add_subcommand("simulate", "advance the coupled system and assert its invariants");
  CLI::App* cmd_potential = app.add_subcommand(
      "potential", "boundary-integral Neumann solve with finite-volume cross-check");
  CLI::App* cmd_converge =
      app.add_subcommand("converge", "refinement-ladder convergence study");
  for (CLI::App* sub : {cmd_check, cmd_simulate, cmd_potential, cmd_converge}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    bsrd::RunConfig config = bsrd::parse_config_file(config_path);
    const std::string requested = app.get_subcommands().front()->get_name();
    if (config.command.empty()) {
      config.command = requested;
    } else if (config.command != requested) {
      std::cerr << "config command \"" << config.command << "\" does not match subcommand \""
                << requested << "\"\n";
      return 2;
    }
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (seed_set) {
      config.seed = seed;
      if (!config.provenance.count("checker.seed")) config.checker_seed = seed;
    }
    const bsrd::RunResult result = bsrd::run(config);
    std::cout << result.summary;
    return result.exit_status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
