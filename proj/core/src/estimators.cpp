#include "mcconc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include <boost/math/special_functions/gamma.hpp>

#include "mcconc/errors.hpp"
#include "mcconc/numerics.hpp"

namespace mcconc {

namespace {

double mean_orlicz(std::span<const double> y, double c, double alpha) {
  CompensatedSum acc;
  if (alpha == 1.0) {
    for (double v : y) acc.add(std::exp(std::abs(v) / c));
  } else {
    for (double v : y) acc.add(std::exp(std::pow(std::abs(v) / c, alpha)));
  }
  return acc.value() / static_cast<double>(y.size());
}

struct JackknifeUnit {
  double num;
  double den;
};

// Ratio estimator sum num / sum den with a grouped delete-one-group jackknife.
std::pair<double, double> ratio_with_jackknife(const std::vector<JackknifeUnit>& units, std::size_t groups) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& u : units) {
    num += u.num;
    den += u.den;
  }
  const double est = den > 0.0 ? num / den : 0.0;
  const std::size_t G = std::min(groups, units.size());
  if (G < 2 || !(den > 0.0)) return {est, 0.0};
  std::vector<double> leave_out(G);
  for (std::size_t g = 0; g < G; ++g) {
    const std::size_t lo = g * units.size() / G;
    const std::size_t hi = (g + 1) * units.size() / G;
    double gn = 0.0;
    double gd = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      gn += units[i].num;
      gd += units[i].den;
    }
    leave_out[g] = den - gd > 0.0 ? (num - gn) / (den - gd) : est;
  }
  double mean = 0.0;
  for (double v : leave_out) mean += v;
  mean /= static_cast<double>(G);
  double var = 0.0;
  for (double v : leave_out) var += (v - mean) * (v - mean);
  var *= static_cast<double>(G - 1) / static_cast<double>(G);
  return {est, 1.96 * std::sqrt(var)};
}

constexpr std::size_t kJackknifeGroups = 20;

}  // namespace

double estimate_psi_alpha(std::span<const double> samples, double alpha) {
  if (samples.size() < 100) {
    throw InsufficientData("psi_alpha estimation needs at least 100 samples, got " + std::to_string(samples.size()));
  }
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  double scale = 0.0;
  for (double v : samples) {
    require(std::isfinite(v), "samples must be finite");
    scale = std::max(scale, std::abs(v));
  }
  if (scale == 0.0) return 0.0;
  // Work on samples / max|x| so that rescaling the input rescales the output exactly.
  std::vector<double> y(samples.size());
  std::transform(samples.begin(), samples.end(), y.begin(), [scale](double v) { return v / scale; });
  const double R = static_cast<double>(y.size());
  double lo = 1.0 / std::pow(std::log(2.0 * R), 1.0 / alpha);
  double hi = 1e9;
  if (mean_orlicz(y, hi, alpha) > 2.0) throw Unbounded("no psi_alpha norm below 1e9 max|x|");
  if (mean_orlicz(y, lo, alpha) <= 2.0) return lo * scale;
  while (hi / lo - 1.0 > 1e-7) {
    const double mid = std::sqrt(lo * hi);
    if (mean_orlicz(y, mid, alpha) <= 2.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi * scale;
}

EmpiricalTail empirical_tail(std::span<const double> replica_values, std::span<const double> grid) {
  if (replica_values.size() < 1000) {
    throw InsufficientData("empirical tail needs at least 1000 replicas, got " +
                           std::to_string(replica_values.size()));
  }
  require(std::is_sorted(grid.begin(), grid.end()), "tail grid must be sorted");
  std::vector<double> sorted(replica_values.begin(), replica_values.end());
  std::sort(sorted.begin(), sorted.end());
  EmpiricalTail out;
  out.replicas = sorted.size();
  const double R = static_cast<double>(sorted.size());
  for (double t : grid) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
    const double p = static_cast<double>(above) / R;
    out.grid.push_back(t);
    out.prob.push_back(p);
    out.std_error.push_back(std::sqrt(p * (1.0 - p) / R));
  }
  return out;
}

std::size_t default_batch_size(std::size_t length) {
  const double root = std::sqrt(static_cast<double>(std::max<std::size_t>(length, 1)));
  return std::size_t{1} << static_cast<int>(std::lround(std::log2(root)));
}

VarianceEstimate estimate_sigma2_regen(std::span<const RegenerationLedger> ledgers) {
  std::vector<JackknifeUnit> units;
  std::size_t skeleton_steps = 0;
  for (const auto& L : ledgers) {
    for (std::size_t i = 0; i < L.blocks.size(); ++i) {
      const double len = static_cast<double>(L.block_lengths[i]) * L.m;
      units.push_back({L.blocks[i] * L.blocks[i], len});
      skeleton_steps += L.block_lengths[i];
    }
  }
  if (units.size() < 1000) {
    throw InsufficientData("regeneration variance estimate needs 1000 blocks, got " + std::to_string(units.size()));
  }
  VarianceEstimate out;
  std::tie(out.sigma2_regen, out.ci_halfwidth) = ratio_with_jackknife(units, kJackknifeGroups);
  out.blocks = units.size();
  out.pi_theta_hat = static_cast<double>(units.size()) / static_cast<double>(skeleton_steps);
  return out;
}

VarianceEstimate estimate_sigma2_batch(const std::vector<std::vector<double>>& series, std::size_t n_batch) {
  require(!series.empty(), "batch means need at least one series");
  require(n_batch >= 1, "batch size must be positive");
  std::vector<JackknifeUnit> units;
  for (const auto& s : series) {
    if (s.size() < 100 * n_batch) {
      std::ostringstream os;
      os << "batch means need length >= 100 * batch size (" << 100 * n_batch << "), got " << s.size();
      throw InsufficientData(os.str());
    }
    const std::size_t k = s.size() / n_batch;
    std::vector<double> means(k);
    double grand = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      CompensatedSum acc;
      for (std::size_t i = j * n_batch; i < (j + 1) * n_batch; ++i) acc.add(s[i]);
      means[j] = acc.value() / static_cast<double>(n_batch);
      grand += means[j];
    }
    grand /= static_cast<double>(k);
    const double weight = static_cast<double>(k - 1) / static_cast<double>(k);
    for (double m : means) units.push_back({static_cast<double>(n_batch) * (m - grand) * (m - grand), weight});
  }
  VarianceEstimate out;
  std::tie(out.sigma2_batch, out.batch_ci_halfwidth) = ratio_with_jackknife(units, kJackknifeGroups);
  out.batches = units.size();
  out.batch_size = n_batch;
  return out;
}

VarianceEstimate estimate_sigma2(std::span<const RegenerationLedger> ledgers,
                                 const std::vector<std::vector<double>>& series, std::size_t n_batch) {
  require(!series.empty(), "batch means need at least one series");
  if (n_batch == 0) n_batch = default_batch_size(series.front().size());
  VarianceEstimate out = estimate_sigma2_regen(ledgers);
  const VarianceEstimate batch = estimate_sigma2_batch(series, n_batch);
  out.sigma2_batch = batch.sigma2_batch;
  out.batch_ci_halfwidth = batch.batch_ci_halfwidth;
  out.batches = batch.batches;
  out.batch_size = batch.batch_size;
  return out;
}

Verdict domination_verdict(const EmpiricalTail& tail, const TailBoundCurve& curve, double allowance) {
  require(tail.grid.size() == tail.prob.size() && tail.prob.size() == tail.std_error.size(),
          "empirical tail arrays differ in length");
  Verdict v;
  v.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tail.grid.size(); ++i) {
    const double t = tail.grid[i];
    if (t < curve.valid_from()) continue;
    const double margin = tail.prob[i] - curve.evaluate(t) - allowance * tail.std_error[i];
    ++v.checked;
    if (margin > v.worst_margin) {
      v.worst_margin = margin;
      v.worst_t = t;
    }
  }
  if (v.checked == 0) v.worst_margin = 0.0;
  v.status = v.worst_margin <= 0.0 ? Status::Pass : Status::Fail;
  return v;
}

nlohmann::json to_json(const Verdict& v) {
  return {{"status", to_string(v.status)},
          {"worst_margin", v.worst_margin},
          {"worst_t", v.worst_t},
          {"checked_points", v.checked}};
}

nlohmann::json to_json(const VarianceEstimate& v) {
  return {{"sigma2_regen", v.sigma2_regen}, {"sigma2_batch", v.sigma2_batch},
          {"ci_halfwidth", v.ci_halfwidth}, {"batch_ci_halfwidth", v.batch_ci_halfwidth},
          {"pi_theta_hat", v.pi_theta_hat}, {"blocks", v.blocks},
          {"batches", v.batches},           {"batch_size", v.batch_size}};
}

WeibullTruncationCheck weibull_truncation_check(double alpha, double scale, std::size_t n, std::size_t replicas,
                                                RandomStream& rng) {
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  require(scale > 0.0, "scale must be positive");
  require(n >= 1 && replicas >= 2, "need n >= 1 and at least two replicas");
  WeibullTruncationCheck out;
  out.alpha = alpha;
  out.psi_norm = scale * std::pow(2.0, 1.0 / alpha);
  out.level = truncation_level(out.psi_norm, alpha, static_cast<double>(n));
  out.lambda = 1.0 / (std::pow(2.0, 1.0 / alpha) * out.psi_norm);
  out.mean_excess = scale * boost::math::tgamma(1.0 + 1.0 / alpha, std::pow(out.level / scale, alpha));
  const double lam_a = std::pow(out.lambda, alpha);
  const double base = std::pow(out.mean_excess, alpha);  // term for untruncated samples
  double sum = 0.0;
  double sumsq = 0.0;
  for (std::size_t r = 0; r < replicas; ++r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = scale * std::pow(rng.exponential(), 1.0 / alpha);
      acc += xi > out.level ? std::pow(xi + out.mean_excess, alpha) : base;
    }
    const double v = std::exp(lam_a * acc);
    sum += v;
    sumsq += v * v;
  }
  const double R = static_cast<double>(replicas);
  out.mgf.mean = sum / R;
  out.mgf.std_error = std::sqrt(std::max(0.0, sumsq / R - out.mgf.mean * out.mgf.mean) / (R - 1.0));
  out.mgf.replicas = replicas;
  return out;
}

}  // namespace mcconc
