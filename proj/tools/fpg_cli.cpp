#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fpg/cli_runner.hpp"
#include "fpg/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"f-softargmax policy gradient toolkit"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> overrides;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config,
                    "JSON config file (or inline {...} document)");
    sub->add_option("--set", overrides,
                    "key=value overrides applied on top of the config");
  };

  CLI::App* landscape = app.add_subcommand(
      "landscape", "regularized-value sweep over bandit logit grids");
  CLI::App* train = app.add_subcommand(
      "train", "run the policy-gradient loop over a hyperparameter grid");
  CLI::App* constants = app.add_subcommand(
      "constants", "report the theory constants for a problem");
  CLI::App* env =
      app.add_subcommand("env", "dump an environment as an MDP JSON document");
  for (CLI::App* sub : {landscape, train, constants, env}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    if (landscape->parsed()) {
      return fpg::cli::run_landscape(
          fpg::cli::load_config(config, overrides, fpg::cli::kLandscapeKeys),
          std::cout);
    }
    if (train->parsed()) {
      return fpg::cli::run_train(
          fpg::cli::load_config(config, overrides, fpg::cli::kTrainKeys),
          std::cout);
    }
    if (constants->parsed()) {
      return fpg::cli::run_constants(
          fpg::cli::load_config(config, overrides, fpg::cli::kConstantsKeys),
          std::cout);
    }
    if (env->parsed()) {
      return fpg::cli::run_env(
          fpg::cli::load_config(config, overrides, fpg::cli::kEnvKeys),
          std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
