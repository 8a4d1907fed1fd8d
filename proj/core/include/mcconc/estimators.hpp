#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcconc/bounds.hpp"
#include "mcconc/chain.hpp"
#include "mcconc/constants.hpp"
#include "mcconc/random.hpp"
#include "mcconc/splitting.hpp"

namespace mcconc {

// Smallest c with mean exp(|x / c|^alpha) <= 2, by geometric bisection to 1e-7 relative.
double estimate_psi_alpha(std::span<const double> samples, double alpha);

struct EmpiricalTail {
  std::vector<double> grid;
  std::vector<double> prob;       // fraction of replicas with value > t
  std::vector<double> std_error;  // sqrt(p (1 - p) / R)
  std::size_t replicas = 0;
};

EmpiricalTail empirical_tail(std::span<const double> replica_values, std::span<const double> grid);

struct VarianceEstimate {
  double sigma2_regen = 0.0;
  double sigma2_batch = 0.0;
  double ci_halfwidth = 0.0;        // regeneration estimator, grouped jackknife
  double batch_ci_halfwidth = 0.0;  // batch means, grouped jackknife
  double pi_theta_hat = 0.0;        // blocks per skeleton step
  std::size_t blocks = 0;
  std::size_t batches = 0;
  std::size_t batch_size = 0;
};

// Block sums must come from a centred function. sum s_i^2 / sum |block|.
VarianceEstimate estimate_sigma2_regen(std::span<const RegenerationLedger> ledgers);
// Nonoverlapping batch means of size n_batch; each series is centred at its
// own mean.
VarianceEstimate estimate_sigma2_batch(const std::vector<std::vector<double>>& series, std::size_t n_batch);
// Both estimators. n_batch = 0 picks sqrt(length) rounded to a power of two.
VarianceEstimate estimate_sigma2(std::span<const RegenerationLedger> ledgers,
                                 const std::vector<std::vector<double>>& series, std::size_t n_batch = 0);

std::size_t default_batch_size(std::size_t length);

struct Verdict {
  Status status = Status::Pass;
  // max over checked t of empirical - curve - 3 stderr; PASS iff <= 0.
  double worst_margin = -1.0;
  double worst_t = 0.0;
  std::size_t checked = 0;
};

Verdict domination_verdict(const EmpiricalTail& tail, const TailBoundCurve& curve, double allowance = 3.0);

nlohmann::json to_json(const Verdict& v);
nlohmann::json to_json(const VarianceEstimate& v);

// i.i.d. |xi| = scale E^{1/alpha} with E ~ Exp(1); psi_alpha norm scale 2^{1/alpha}.
struct WeibullTruncationCheck {
  double alpha = 0.5;
  double psi_norm = 0.0;  // c
  double level = 0.0;     // truncation level M
  double lambda = 0.0;    // 1 / (2^{1/alpha} c)
  double mean_excess = 0.0;  // E|Y| for Y = xi 1{|xi| > M}
  MonteCarloMean mgf;     // mean of exp(lambda^alpha sum (|Y_i| + E|Y_i|)^alpha)
};

WeibullTruncationCheck weibull_truncation_check(double alpha, double scale, std::size_t n, std::size_t replicas,
                                                RandomStream& rng);

}  // namespace mcconc
