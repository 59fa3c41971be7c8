#include <iostream>

#include <CLI11.hpp>

#include "sivrelax/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace sivrelax::cli;
  CLI::App app{"Spin relaxation models for a trigonal S=1 defect"};
  app.require_subcommand(1);

  CliOptions options;
  std::string config, out, model;
  std::uint64_t seed = 0;
  auto* config_opt = app.add_option("--config", config, "JSON or TOML run configuration")
                         ->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out, "directory for the output file (default: stdout)");
  auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the config)");
  auto* model_opt = app.add_option("--model", model, "relaxation model")
                        ->check(CLI::IsMember({"singlet", "triplet"}));
  app.add_option("--threads", options.threads, "worker threads for sweeps")
      ->check(CLI::PositiveNumber);

  for (const auto& name : command_names()) {
    app.add_subcommand(name, command_summary(name))->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  options.command = app.get_subcommands().front()->get_name();
  if (*config_opt) options.config_path = config;
  if (*out_opt) options.out_dir = out;
  if (*seed_opt) options.seed = seed;
  if (*model_opt) options.model = model;
  return run(options, std::cout, std::cerr);
}
