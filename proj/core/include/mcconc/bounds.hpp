#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcconc/constants.hpp"

namespace mcconc {

struct BoundTerm {
  std::string label;
  std::function<double(double)> fn;
};

// Named sum of explicit tail terms. evaluate(t) = min(1, sum) for
// t >= valid_from and 1 below it.
class TailBoundCurve {
 public:
  TailBoundCurve(std::string name, std::vector<BoundTerm> terms, nlohmann::json params, double valid_from = 0.0);

  const std::string& name() const { return name_; }
  const nlohmann::json& params() const { return params_; }
  double valid_from() const { return valid_from_; }
  std::size_t size() const { return terms_.size(); }
  const std::string& label(std::size_t i) const { return terms_.at(i).label; }

  double evaluate(double t) const;
  double raw_sum(double t) const;
  std::vector<double> breakdown(double t) const;
  // Curve in s = t / factor: every term evaluated at factor * s.
  TailBoundCurve rescaled(double factor, std::string name) const;

 private:
  std::string name_;
  std::vector<BoundTerm> terms_;
  nlohmann::json params_;
  double valid_from_;
};

// coef * exp(-(t/scale)^alpha); a zero scale contributes 0 for t > 0.
double weibull_term(double coef, double t, double scale, double alpha);
// coef * exp(-t^2 / (2 (variance + range * t))); zero variance and range give 0 for t > 0.
double subgaussian_term(double coef, double t, double variance, double range);

// c (3 alpha^{-2} log(x v e))^{1/alpha}
double truncation_level(double c, double alpha, double x);

// -- Two-term one-dependent bound, and the general Markov bound ------------

// Bound on P(|sum| > 3t), i.e. indexed by t as stated.
double general_markov_bound(double t, double a, double b, double c, double sigma2, double pi_theta, std::size_t n,
                            std::size_t m, double alpha);
// Same bound as a curve in the deviation u = 3t.
TailBoundCurve general_markov_curve(double a, double b, double c, double sigma2, double pi_theta, std::size_t n,
                                    std::size_t m, double alpha);

// -- Geometrically ergodic, m = 1 -------------------------------------------

struct GeometricBoundParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 1.0;
  double sigma2 = 0.0;
  double pi_theta = 1.0;      // enters M(eta)
  double pi_theta_inv = 1.0;  // coefficient of the second term
  std::size_t n = 1;
  double alpha = 1.0;
  double eta = 1.0;
};

TailBoundCurve geometric_curve(const GeometricBoundParams& p);
double geometric_bound(double t, double a, double b, double c, double d, double sigma2, double pi_theta,
                       std::size_t n, double alpha, double eta);

struct GeometricPQParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 1.0;
  double sigma2 = 0.0;
  double pi_theta = 1.0;
  double pi_theta_inv = 1.0;
  std::size_t n = 1;
  double alpha = 1.0;
  double p = 2.0;  // Hoelder pair p, q = p / (p - 1)
  double eps = 0.5;
};

// Generic (p, q, eps) form of the geometric bound.
TailBoundCurve geometric_pq_curve(const GeometricPQParams& p);

// (p, eps) substitution q^4 = 1 + eps = sqrt(1 + eta).
GeometricPQParams pq_from_eta(const GeometricBoundParams& p);

// Drift certificate to curve: geometric_drift_norms, combine_orlicz, bound_d,
// sigma_upper, geometric_curve.
struct DriftBoundInputs {
  const DriftCertificate* cert = nullptr;
  double delta = 1.0;
  double pi_C = 1.0;
  double kappa = 1.0;
  double s = 1.0;
  double V_x = 1.0;
  bool x_in_C = true;
  double eta = 0.5;
  std::size_t n = 1;
};

struct DriftBoundResult {
  BlockNormSet norms;
  GeometricBoundParams params;
  TailBoundCurve curve;
};

DriftBoundResult drift_bound(const DriftBoundInputs& in);
double drift_bound_value(const DriftBoundInputs& in, double t);

// -- Empirical processes ----------------------------------------------------

struct EmpiricalProcessParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 1.0;
  double e = 0.0;
  double sigma2 = 0.0;
  double pi_theta = 1.0;
  double pi_theta_inv = 1.0;
  double pi_F = 0.0;
  std::size_t n = 1;
  double alpha = 1.0;
  double eps = 0.25;
};

double empirical_process_threshold(const EmpiricalProcessParams& p);  // C(eps)
TailBoundCurve empirical_process_curve(const EmpiricalProcessParams& p);
double empirical_process_bound(double t, const EmpiricalProcessParams& p);

// -- Independent and one-dependent sequences --------------------------------

TailBoundCurve independent_onedep_curve(double c, double sigma2, std::size_t n, std::size_t m, double alpha);
double independent_onedep_bound(double t, double c, double sigma2, std::size_t n, std::size_t m, double alpha);

TailBoundCurve independent_stopped_curve(double c, double sigma2, std::size_t n, double alpha, double eps,
                                         double a_center, double psi1_excess, double p);
double independent_stopped_bound(double t, double c, double sigma2, std::size_t n, double alpha, double eps,
                                 double a_center, double psi1_excess, double p);
// The min in the definition of mu; exposed for branch checks.
double stopped_mu(double c, double sigma2, std::size_t n, double alpha, double eps, double psi1_excess);

TailBoundCurve bernstein_psi1_curve(double c, std::size_t n);
double bernstein_psi1_tail(double t, double c, std::size_t n);

struct NDeviation {
  double pi_theta = 1.0;
  double d = 1.0;
  double eps = 0.5;
  std::size_t n = 1;
  double threshold = 0.0;    // pi*(theta) n (1 + eps)
  double psi1_excess = 0.0;  // 144 pi*(theta)^2 d^2 / eps
  // Bound on P(N > k); 1 below the threshold.
  double tail(double k) const;
};

NDeviation N_deviation_psi1(std::size_t n, double pi_theta, double d, double eps);

double klein_rio_D(double eps);
TailBoundCurve klein_rio_curve(double sigma2, std::size_t n, double M, double ES, double eps);
double klein_rio_tail(double t, double sigma2, std::size_t n, double M, double ES, double eps);
// Form without eps: exp(-t^2 / (2 sigma^2 n + (4 ES + 3t) M)).
double klein_rio_tail_plain(double t, double sigma2, std::size_t n, double M, double ES);

TailBoundCurve truncated_empirical_curve(double c, double sigma2, std::size_t n, double alpha, double eps);
double truncated_empirical_bound(double t, double c, double sigma2, std::size_t n, double alpha, double eps);

struct UWExpectationBounds {
  double EU = 0.0;
  double EW = 0.0;
};
UWExpectationBounds uw_expectation_bounds(double a, double b, double pi_theta, double alpha);

// -- Export ------------------------------------------------------------------

// Rows: t, total, one column per term.
void write_curve_csv(const TailBoundCurve& curve, std::span<const double> grid, const std::filesystem::path& path);
nlohmann::json curve_sidecar(const TailBoundCurve& curve);

}  // namespace mcconc
