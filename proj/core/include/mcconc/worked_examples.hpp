#pragma once

#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcconc/bounds.hpp"
#include "mcconc/chain.hpp"
#include "mcconc/constants.hpp"

namespace mcconc {

// Metropolis chain on {0, 1, ...} with geometric target, C = {0} an atom,
// V(i) = A^{i+1}.
struct GeometricExample {
  double rho;
  double A;
  double lambda;
  double b;
  double K;
  double delta;
  double pi_C;  // pi(0) = 1 - rho
  std::shared_ptr<const GeometricMetropolisKernel> kernel;
  LatticeChain chain;
  DriftCertificate cert;
};

double geometric_example_lambda(double rho, double A);
GeometricExample geometric_example(double rho, double A);
// Stationary mean of the identity under the geometric target: rho / (1 - rho).
double geometric_target_mean(double rho);

struct LogConcaveDrift {
  double lambda;
  double b;
};

// Drift constants for V(x) = exp(|x| + 1), C = [-x*, x*], by quadrature. lambda
// may be negative; no feasibility check.
LogConcaveDrift logconcave_drift_constants(const SymmetricProposal& q, double xstar);
// pi(C) inf_{x,y in C} q(y - x) / sup_C pi with nu = pi( . | C).
double logconcave_delta(const SymmetricProposal& q, const SymmetricTarget& target, double xstar);

struct LogConcaveExample {
  SymmetricProposal q;
  SymmetricTarget target;
  double xstar;
  double lambda;
  double b;
  double K;  // exp(x* + 1)
  double delta;
  double pi_C;
  RealLineChain chain;
  DriftCertificate cert;
};

LogConcaveExample logconcave_example(const SymmetricProposal& q, const SymmetricTarget& target, double xstar);

struct ScanRow {
  double xstar = 0.0;
  bool feasible = false;
  double lambda = 0.0;
  double b = 0.0;
  double delta = 0.0;
  double bound = 1.0;      // clamped curve value
  double raw_bound = 0.0;  // unclamped term sum; the ranking objective
};

struct ScanSettings {
  double kappa = 1.0;
  double s = 1.0;
  double start = 0.0;
  double eta = 0.5;
  std::size_t n = 1 << 12;
  double t = 0.0;
};

struct ScanResult {
  double best_xstar = 0.0;
  std::vector<ScanRow> table;
};

// Ranks candidate x* by the raw drift bound term sum at (n, t); clamped values
// tie at 1 in the uninformative regime.
ScanResult scan_xstar(const SymmetricProposal& q, const SymmetricTarget& target, const std::vector<double>& grid,
                      const ScanSettings& settings);

struct HilbertReport {
  double expectation_bound = 0.0;  // bound on E || sum_{i<n} G(X_i) ||
  double lln_offset = 0.0;         // (1 + 7 eps) expectation_bound / n
  TailBoundCurve lln_curve;        // bound on P(||n^{-1} sum G|| >= lln_offset + t)
};

double hilbert_expectation_bound(double a, double b, double c, double pi_theta, double alpha, std::size_t n);
// pi_theta_inv and e, d, pi_F, sigma2 feed the tail curve; pi_theta is used
// where a larger value weakens the bound.
HilbertReport hilbert_example_bound(const EmpiricalProcessParams& p);

nlohmann::json to_json(const GeometricExample& ex);
nlohmann::json to_json(const LogConcaveExample& ex);

}  // namespace mcconc
