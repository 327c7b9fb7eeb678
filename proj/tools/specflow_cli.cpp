// Experiment runner: named experiments with JSON configs and CSV/JSON output.
//
// Exit codes: 0 all checks pass, 2 a check failed, 3 a numerical certificate
// failed (residual / cutoff stability), 4 config or usage error.

#include <CLI11.hpp>
#include <iostream>

#include "specflow/experiments.hpp"
#include "specflow/util.hpp"

using specflow::cli::ExperimentConfig;
using specflow::cli::RunReport;

int main(int argc, char** argv) {
  CLI::App app{"specflow: spectral flow of twisted Dirac operators on flat tori"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = -1;
  std::uint64_t seed = 0;
  bool have_seed = false;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_dir, "output directory override");
  app.add_option("--threads", threads, "worker thread cap (default: all cores)");
  app.add_option("--seed", seed, "random seed override")->each([&](const std::string&) {
    have_seed = true;
  });

  const std::vector<std::tuple<std::string, std::string, RunReport (*)(const ExperimentConfig&)>>
      commands = {
          {"winding", "T^1 winding oracle: exact flow = prediction = m", specflow::cli::run_winding},
          {"contact-sweep", "T^3 contact perturbation sweep with slope fit",
           specflow::cli::run_contact_sweep},
          {"estimator-check", "mollified estimator vs exact flow, |f - int| <= n",
           specflow::cli::run_estimator_check},
          {"heat-check", "heat trace, counting, and kernel-density diagnostics",
           specflow::cli::run_heat_checks},
          {"chs-check", "exterior-algebra and Chern-Simons property suite",
           specflow::cli::run_chs_checks},
          {"all", "every experiment in sequence", specflow::cli::run_all},
      };
  for (const auto& [cname, desc, fn] : commands) app.add_subcommand(cname, desc)->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg;
    if (!config_path.empty())
      cfg = ExperimentConfig::from_json(specflow::io::read_json(config_path));
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (threads >= 0) cfg.threads = threads;
    if (have_seed) cfg.seed = seed;

    for (const auto& [cname, desc, fn] : commands) {
      if (!app.get_subcommand(cname)->parsed()) continue;
      cfg.experiment = cname;
      const RunReport rep = fn(cfg);
      for (const auto& line : rep.lines) std::cout << line << "\n";
      std::cout << (rep.ok ? "PASS" : "FAIL") << " " << cname << "\n";
      return rep.ok ? 0 : 2;
    }
    std::cerr << "no subcommand\n";
    return 4;
  } catch (const specflow::CertificateError& e) {
    std::cerr << "certificate failure: " << e.what() << "\n";
    return 3;
  } catch (const specflow::ContractViolation& e) {
    std::cerr << "config/contract error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
