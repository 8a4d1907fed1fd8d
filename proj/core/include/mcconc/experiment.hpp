#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcconc/bounds.hpp"
#include "mcconc/estimators.hpp"
#include "mcconc/worked_examples.hpp"

namespace mcconc {

enum class Command { Certify, Simulate, Verify, Scan, Report };
const char* to_string(Command c);

struct GeometricModelConfig {
  double rho = 0.5;
  double A = 1.2;
  std::optional<double> lambda;  // overrides the derived drift rate
  std::optional<double> b;
};

struct LogConcaveModelConfig {
  std::string proposal = "laplace";
  double proposal_scale = 1.0;
  std::string target = "gaussian";
  double target_param = 1.0;
  double xstar = 3.0;
  std::optional<double> lambda;
  std::optional<double> b;
};

struct TGridConfig {
  std::vector<double> values;  // explicit grid, or
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  std::string scale = "absolute";  // "absolute" | "sqrt_n" | "n"

  std::vector<double> grid_for(std::size_t n) const;
};

struct BoundConfig {
  std::string name = "geometric_drift";
  double eta = 0.5;
  double s = 1.0;
  std::optional<double> kappa;  // default: smallest valid constant for the chosen function
};

struct ScanConfig {
  std::vector<double> xstar_grid;
  std::size_t n = 1 << 12;
  double t = 0.0;
};

struct ExperimentConfig {
  Command command = Command::Verify;
  std::variant<GeometricModelConfig, LogConcaveModelConfig> model;
  std::string function = "identity";  // "identity" | "abs"
  double start = 0.0;
  BoundConfig bound;
  std::vector<std::size_t> n;
  std::size_t replicas = 1000;
  std::uint64_t seed = 0;
  TGridConfig t_grid;
  ScanConfig scan;
  std::vector<std::filesystem::path> inputs;  // report
  std::filesystem::path output_dir = ".";
  std::size_t threads = 1;
};

// Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);
// Parse errors are reported with line and column.
nlohmann::json load_config_document(const std::filesystem::path& path);
ExperimentConfig load_config(const std::filesystem::path& path);

// A concrete chain with its drift certificate and the centred test function.
struct ModelInstance {
  std::variant<GeometricExample, LogConcaveExample> example;
  DriftCertificate cert;  // possibly with overridden lambda or b
  double mean = 0.0;      // stationary mean of the test function
  double kappa = 1.0;     // |g - mean| <= kappa log V
  std::string function = "identity";

  bool in_small_set(double x) const;
  double delta() const;
  double pi_C() const;
  double g(double x) const;
};

ModelInstance build_model(const ExperimentConfig& cfg);

DriftBoundInputs drift_inputs(const ModelInstance& model, const ExperimentConfig& cfg, std::size_t n);

// |sum_{k<n} (g(X_k) - mean)| for replicas 0..R-1, chain started at `start`.
// Replica i uses RandomStream::derive(seed, (n << 32) ^ i); results do not
// depend on the thread count.
std::vector<double> replica_deviations(const ModelInstance& model, double start, std::size_t n,
                                       std::size_t replicas, std::uint64_t seed, std::size_t threads);

struct RunOutcome {
  Status status = Status::Pass;
  nlohmann::json summary;
};

RunOutcome run_certify(const ExperimentConfig& cfg);
RunOutcome run_simulate(const ExperimentConfig& cfg);
RunOutcome run_verify(const ExperimentConfig& cfg);
RunOutcome run_scan(const ExperimentConfig& cfg);
RunOutcome run_report(const ExperimentConfig& cfg);
RunOutcome run_experiment(const ExperimentConfig& cfg);

// 0 success, 1 config error, 2 verification failure or insufficient data,
// 3 runtime failure.
int exit_code_for(const std::exception& e);

}  // namespace mcconc
