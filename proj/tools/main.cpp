#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Class-incremental cross-domain training with Bayesian mutual distillation"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run = app.add_subcommand("run", "Train on the configured task stream and write reports");
  run->add_option("config", run_config, "Run configuration (JSON)")->required();

  std::string sweep_config;
  std::vector<double> taus{1.0, 1.25, 1.3, 1.4, 2.0};
  auto* sweep = app.add_subcommand("tau-sweep", "One run per temperature; report top-1 error");
  sweep->add_option("config", sweep_config, "Run configuration (JSON)")->required();
  sweep->add_option("--taus", taus, "Temperatures to evaluate")->delimiter(',');

  std::uint64_t seed = 1;
  bool inject_fault = false;
  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of all loss gradients");
  grad->add_option("--seed", seed, "Random seed");
  grad->add_flag("--inject-fault", inject_fault, "Corrupt the L_md gradient (self-test)");

  std::string model_path, csv_path;
  auto* eval = app.add_subcommand("eval", "Evaluate a saved model on a CSV dataset");
  eval->add_option("model", model_path, "model.json written by run")->required();
  eval->add_option("csv", csv_path, "Dataset CSV (domain,label,f0,...)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : icda::cli::kExitConfig;
  }

  if (*run) return icda::cli::cmd_run(run_config, std::cout, std::cerr);
  if (*sweep) return icda::cli::cmd_tau_sweep(sweep_config, taus, std::cout, std::cerr);
  if (*grad) return icda::cli::cmd_gradcheck(seed, inject_fault, std::cout, std::cerr);
  if (*eval) return icda::cli::cmd_eval(model_path, csv_path, std::cout, std::cerr);
  return icda::cli::kExitConfig;
}
