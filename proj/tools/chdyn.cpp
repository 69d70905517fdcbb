#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "chdyn/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Cahn-Hilliard with dynamic boundary conditions"};
  app.require_subcommand(1);

  std::string out;
  int threads = 0;
  app.add_option("--out", out, "Output directory (overrides [output] dir)");
  app.add_option("--threads", threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);

  std::string run_config;
  auto* run = app.add_subcommand("run", "Run one simulation");
  run->add_option("config", run_config, "Config file")->required();

  std::string sweep_config;
  std::string kind;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep->add_option("--kind", kind, "Sweep kind")
      ->required()
      ->check(CLI::IsMember({"tau", "ell", "hgamma"}));
  sweep->add_option("config", sweep_config, "Config file")->required();
  for (auto* sub : {run, sweep}) {
    sub->add_option("--out", out, "Output directory (overrides [output] dir)");
    sub->add_option("--threads", threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : chdyn::kExitConfig;
  }

  std::optional<std::filesystem::path> out_dir;
  if (!out.empty()) out_dir = out;
  std::optional<int> worker_count;
  if (threads > 0) worker_count = threads;

  if (*run) return chdyn::cmd_run(run_config, out_dir, std::cerr);
  return chdyn::cmd_sweep(kind, sweep_config, out_dir, worker_count, std::cerr);
}
