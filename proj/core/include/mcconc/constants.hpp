#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "mcconc/chain.hpp"
#include "mcconc/random.hpp"

namespace mcconc {

// Left side minus right side of the splitting equation
// 2^{1/r} delta^{1-1/r} + 2^{1+1/r} (1-delta)^{1-1/r} = 2.
double splitting_equation_residual(double r, double delta);
// log(6/(2-delta)) / log(2/(2-delta)).
double splitting_root_upper(double delta);
double solve_r(double delta);

// (x^alpha + y^alpha)^{1/alpha}
double orlicz_sum(double x, double y, double alpha);

struct OrliczTriple {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

OrliczTriple combine_orlicz(double alpha, double calA, double calB, double calC, double calD, double r);

// psi_1 (or psi_beta) norms of the return time to C, started from x, from pi,
// and the supremum over starting points in C.
struct TauNorms {
  double from_x = 0.0;
  double from_pi = 0.0;
  double sup_C = 0.0;
};

TauNorms tau_psi1_norms(const DriftCertificate& cert, double V_x, double pi_V, double pi_C, bool x_in_C = false);

struct ExcursionNorms {
  double calA = 0.0;
  double calB = 0.0;
  double calC = 0.0;
  double calD = 0.0;
};

// Regular drift (P^m V - V <= -exp(h) + b 1_C) combined with psi_beta norms
// of the return time; gamma = alpha beta / (beta - alpha).
ExcursionNorms regular_drift_norms(double alpha, const DriftCertificate& cert, const TauNorms& tau_beta, double c,
                                   double V_x, double pi_V);

struct GeometricNormBundle {
  double alpha = 1.0;
  double calA_drift = 0.0;
  double calB_drift = 0.0;
  double calC_drift = 0.0;
  double pi_g_bound = 0.0;
  double pi_V_bound = 0.0;
};

// Geometric drift plus |g| <= kappa (log V)^s, alpha = 1/(s+1).
GeometricNormBundle geometric_drift_norms(const DriftCertificate& cert, double kappa, double s, double V_x,
                                          double pi_C, bool x_in_C);

// psi_1 norm bounds for the regeneration increment (d) and the first
// regeneration time from x (e).
double bound_d(const DriftCertificate& cert, double delta);
double bound_e(const DriftCertificate& cert, double delta, double V_x, bool x_in_C);

// Upper bound on the L2 norm of a block sum with psi_alpha norm c.
double sigma_upper(double c, double alpha);

struct MultiplicativeDriftBound {
  double psi1_bound = 0.0;      // max{1, (b+K)/log 2} c
  double moment_bound = 0.0;    // exp(b 1_C(x) + V(x))
};

MultiplicativeDriftBound multiplicative_drift_bound(double c, double b, double K, double V_x, bool x_in_C);

struct MultiplicativeDriftCheck {
  Status status = Status::Pass;
  double max_violation = 0.0;  // max of log P^m(e^V)(x) - V(x) + g(x) - b 1_C(x)
  double worst_state = 0.0;
};

// Grid diagnostic for exp(-V) P^m(exp V) <= exp(-g + b 1_C) on a lattice chain.
MultiplicativeDriftCheck check_multiplicative_drift(const LatticeChain& model, const std::function<double(double)>& V,
                                                    const std::function<double(double)>& g_log_mgf, double b,
                                                    std::span<const std::int64_t> grid, double tol = 1e-10);

struct MonteCarloMean {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t replicas = 0;
};

// Monte Carlo estimate of E_x exp(sum_{k=0}^{sigma_C} g(X_{km})) with sigma_C the
// first skeleton time k >= 0 in C. Diagnostic only.
MonteCarloMean estimate_excursion_mgf(const LatticeChain& model, const std::function<double(double)>& g,
                                      std::int64_t x, std::size_t replicas, RandomStream& rng,
                                      std::size_t max_steps = 1'000'000);

enum class NormSource { DriftDerived, Empirical, UserSupplied };
const char* to_string(NormSource s);

struct BlockNormSet {
  double alpha = 1.0;
  double calA = 0.0;
  double calB = 0.0;
  double calC = 0.0;
  double calD = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 1.0;
  double e = 0.0;
  double r = 1.0;
  double delta = 1.0;
  // Value of pi*(theta) used where a larger value makes the bound weaker, and
  // the bound on its inverse used as a coefficient. Drift-derived: 1 and d.
  double pi_theta = 1.0;
  double pi_theta_inv = 1.0;
  double sigma_cap = 0.0;  // upper bound on sigma^2
  NormSource source = NormSource::DriftDerived;
  GeometricNormBundle drift;
};

// Full drift-to-norms pipeline for a geometric drift certificate with m = 1.
BlockNormSet certify_geometric(const DriftCertificate& cert, double delta, double kappa, double s, double V_x,
                               double pi_C, bool x_in_C);

nlohmann::json to_json(const BlockNormSet& set);

}  // namespace mcconc
