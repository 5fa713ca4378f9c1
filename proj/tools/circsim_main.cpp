#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "circsim/errors.hpp"
#include "circsim/recipes.hpp"
#include "circsim/runner.hpp"

namespace {

int execute(const circsim::cli::RunConfig& cfg,
            const circsim::cli::RunOptions& opts) {
  circsim::cli::RunOutcome outcome = circsim::cli::run_config(cfg, opts);
  std::fputs(outcome.summary.c_str(), stdout);
  std::printf("\nwrote %s\n", outcome.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "circsim: circular Rydberg state simulator and analysis chain"};
  app.require_subcommand(1);

  std::string config_path;
  std::string recipe_name;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool noiseless = false;
  bool verbose = false;

  auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir,
                    "Output directory (default: config out_dir, then "
                    "$CIRCSIM_OUT_DIR/<name>, then out/<name>)");
    cmd->add_option("--seed", seed, "Override the configured RNG seed");
    cmd->add_flag("--noiseless", noiseless,
                  "Expectation values: no shot sampling, no source jitter");
    cmd->add_flag("--verbose", verbose, "Print per-job progress");
  };

  CLI::App* run = app.add_subcommand(
      "run", "Execute a JSON run configuration and its analysis");
  run->add_option("config", config_path, "Path to the configuration file")
      ->required();
  add_run_options(run);

  CLI::App* validate = app.add_subcommand(
      "validate", "Check a configuration without running any scan");
  validate->add_option("config", config_path, "Path to the configuration file")
      ->required();

  std::string recipe_list;
  for (const std::string& name : circsim::cli::recipe_names()) {
    if (!recipe_list.empty()) recipe_list += ", ";
    recipe_list += name;
  }
  CLI::App* reproduce = app.add_subcommand(
      "reproduce", "Run one of the shipped recipes: " + recipe_list);
  reproduce->add_option("recipe", recipe_name, "Recipe name")->required();
  add_run_options(reproduce);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    circsim::cli::RunOptions opts;
    opts.out_dir = out_dir;
    opts.seed = seed;
    opts.noiseless = noiseless;
    opts.quiet = !verbose;

    if (run->parsed()) {
      return execute(circsim::cli::parse_config_file(config_path), opts);
    }
    if (validate->parsed()) {
      circsim::cli::RunConfig cfg =
          circsim::cli::parse_config_file(config_path);
      circsim::cli::validate_config(cfg);
      std::printf("ok: %s (%zu jobs, analysis %s)\n", config_path.c_str(),
                  cfg.jobs.size(), cfg.analysis.c_str());
      return 0;
    }
    return execute(circsim::cli::build_recipe(recipe_name), opts);
  } catch (const circsim::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return 3;
  }
}
