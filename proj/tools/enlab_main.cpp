#include <CLI11.hpp>

#include <cstdio>
#include <exception>

#include "enlab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"enlab: dissipative learning dynamics, energy ledgers, and stability certificates"};
  app.require_subcommand(1);

  std::string config_path, out_dir, only;
  int jobs = 1;
  bool plots = false;

  auto* run = app.add_subcommand("run", "execute every scenario in a config");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->add_option("--only", only, "run a single scenario by name");
  run->add_option("--jobs", jobs, "number of concurrent scenario workers")->check(CLI::Range(1, 256));
  run->add_flag("--plots", plots, "emit SVG charts next to the CSV outputs");

  std::string list_path;
  auto* list = app.add_subcommand("list", "print scenario names and their checks");
  list->add_option("config", list_path, "experiment config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto config = enlab::load_experiment_config(config_path);
      enlab::RunOptions options;
      options.out_dir_override = out_dir;
      options.only = only;
      options.jobs = jobs;
      options.plots = plots;
      const auto result = enlab::run_suite(config, options);
      int passed = 0, failed = 0, na = 0;
      for (const auto& row : result.rows) {
        if (row.status == "pass") ++passed;
        else if (row.status == "fail") ++failed;
        else ++na;
      }
      std::printf("%d checks: %d pass, %d fail, %d not-applicable\n",
                  static_cast<int>(result.rows.size()), passed, failed, na);
      std::printf("outputs in %s\n", result.output_dir.c_str());
      return result.exit_code;
    }
    const auto config = enlab::load_experiment_config(list_path);
    std::fputs(enlab::list_scenarios(config).c_str(), stdout);
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
