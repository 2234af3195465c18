#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace metricflow::cli;

  CLI::App app{"metricflow: invariant phase-space metrics for non-Hamiltonian systems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  CommandOptions opts;
  double tol = 0.0;
  std::uint64_t seed = 0;

  for (const char* name : {"classify", "evolve-metric", "audit", "bracket"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "System configuration (JSON)")->required();
    sub->add_option("--out", out_path, "Write the report here instead of stdout");
    sub->add_option("--tol", tol, "Classification / audit tolerance");
    sub->add_option("--seed", seed, "Seed for sampled points");
    if (std::string(name) == "bracket") {
      sub->add_option("--a", opts.a, "Observable A");
      sub->add_option("--b", opts.b, "Observable B");
      sub->add_option("--c", opts.c, "Observable C (enables the Jacobi check)");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--tol")) opts.tolerance = tol;
  if (chosen->count("--seed")) opts.seed = seed;
  if (opts.tolerance && !(*opts.tolerance > 0.0)) {
    std::cerr << "--tol must be positive\n";
    return kExitUsage;
  }

  const CommandResult result = run_command(chosen->get_name(), config_path, opts);
  if (!out_path.empty() && result.exit_code < kExitUsage) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write '" << out_path << "'\n";
      return kExitInternal;
    }
    out << result.output;
  } else {
    std::cout << result.output;
  }
  return result.exit_code;
}
