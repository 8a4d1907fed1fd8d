// Batch front end: certify, simulate, verify, scan, report.
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mcconc/errors.hpp"
#include "mcconc/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Concentration bounds for regenerative Markov chains"};
  std::string config_path;
  std::string command;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  std::optional<std::size_t> threads;
  std::optional<std::string> out_dir;
  app.add_option("command", command, "certify | simulate | verify | scan | report (overrides the config)");
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--seed", seed, "seed (overrides the config)");
  app.add_option("--replicas", replicas, "replica count (overrides the config)");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--threads", threads, "worker threads");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    nlohmann::json doc = mcconc::load_config_document(config_path);
    if (seed) doc["seed"] = *seed;
    if (!command.empty()) doc["command"] = command;
    mcconc::ExperimentConfig cfg = mcconc::parse_config(doc);
    if (replicas) {
      if (*replicas < 1) throw mcconc::ConfigError("--replicas must be >= 1");
      cfg.replicas = *replicas;
    }
    if (threads) cfg.threads = *threads;
    if (out_dir) cfg.output_dir = *out_dir;

    const mcconc::RunOutcome outcome = mcconc::run_experiment(cfg);
    std::cout << outcome.summary.dump(2) << "\n";
    return outcome.status == mcconc::Status::Pass ? 0 : 2;
  } catch (const mcconc::NoRegeneration& e) {
    std::cerr << "error: " << e.what() << " (try a larger n)\n";
    return mcconc::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mcconc::exit_code_for(e);
  }
}
