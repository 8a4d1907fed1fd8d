#include "mcconc/constants.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "mcconc/errors.hpp"
#include "mcconc/numerics.hpp"

namespace mcconc {

double splitting_equation_residual(double r, double delta) {
  const double e = 1.0 - 1.0 / r;
  const double t1 = std::pow(2.0, 1.0 / r) * std::pow(delta, e);
  // delta = 1 leaves no residual kernel; the term is absent, not 0^0.
  const double t2 = delta < 1.0 ? std::pow(2.0, 1.0 + 1.0 / r) * std::pow(1.0 - delta, e) : 0.0;
  return t1 + t2 - 2.0;
}

double splitting_root_upper(double delta) { return std::log(6.0 / (2.0 - delta)) / std::log(2.0 / (2.0 - delta)); }

double solve_r(double delta) {
  require(delta > 0.0 && delta <= 1.0, "solve_r needs delta in (0, 1]");
  if (delta == 1.0) return 1.0;
  const double lo = 1.0;
  const double hi = splitting_root_upper(delta);
  const double f_lo = splitting_equation_residual(lo, delta);
  const double f_hi = splitting_equation_residual(hi, delta);
  if (f_hi == 0.0) return hi;
  if (!(f_lo > 0.0 && f_hi < 0.0)) {
    std::ostringstream os;
    os << "splitting equation not bracketed for delta = " << delta << ": f(1) = " << f_lo << ", f(" << hi
       << ") = " << f_hi;
    throw BracketFailure(os.str());
  }
  std::uintmax_t iters = 200;
  auto [a, b] = boost::math::tools::toms748_solve([delta](double r) { return splitting_equation_residual(r, delta); },
                                                  lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(52),
                                                  iters);
  const double r = std::abs(splitting_equation_residual(a, delta)) <= std::abs(splitting_equation_residual(b, delta))
                       ? a
                       : b;
  if (std::abs(splitting_equation_residual(r, delta)) > 1e-12)
    throw BracketFailure("splitting equation residual above 1e-12 after root finding");
  return r;
}

double orlicz_sum(double x, double y, double alpha) {
  if (x == 0.0 && y == 0.0) return 0.0;
  return std::pow(std::pow(x, alpha) + std::pow(y, alpha), 1.0 / alpha);
}

OrliczTriple combine_orlicz(double alpha, double calA, double calB, double calC, double calD, double r) {
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  require(calA >= 0.0 && calB >= 0.0 && calC >= 0.0 && calD >= 0.0, "excursion norms must be nonnegative");
  require(r >= 1.0, "r must be at least 1");
  const double scale = std::pow(r, 1.0 / alpha);
  return {scale * orlicz_sum(std::max(calA, calC), calD, alpha), scale * orlicz_sum(std::max(calB, calC), calD, alpha),
          scale * orlicz_sum(calC, calD, alpha)};
}

namespace {

double log2_ratio_floor1(double x) { return std::max(std::log(x) / kLn2, 1.0); }

void require_geometric(const DriftCertificate& cert) {
  require(cert.kind() == DriftKind::GeometricPV, "geometric drift certificate required");
}

}  // namespace

TauNorms tau_psi1_norms(const DriftCertificate& cert, double V_x, double pi_V, double pi_C, bool x_in_C) {
  require_geometric(cert);
  const double lam = cert.lambda();
  const double inv_log = 1.0 / std::log(1.0 / (1.0 - lam));
  const double in_C_level = cert.b() / (1.0 - lam) + cert.K();
  TauNorms t;
  t.from_x = log2_ratio_floor1(x_in_C ? in_C_level : V_x) * inv_log;
  t.from_pi = log2_ratio_floor1(pi_V + in_C_level * pi_C) * inv_log;
  t.sup_C = log2_ratio_floor1(in_C_level) * inv_log;
  return t;
}

ExcursionNorms regular_drift_norms(double alpha, const DriftCertificate& cert, const TauNorms& tau_beta, double c,
                                   double V_x, double pi_V) {
  require(cert.kind() == DriftKind::RegularExpH, "regular drift certificate required");
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  require(c > 0.0, "c must be positive");
  const double beta = cert.beta();
  if (!(beta > alpha)) throw GammaUndefined("regular drift needs beta > alpha");
  const double gamma = alpha * beta / (beta - alpha);
  const double b = cert.b();
  auto factor = [&](double level) { return c * std::pow(log2_ratio_floor1(level), 1.0 / gamma); };
  ExcursionNorms out;
  out.calC = out.calD = tau_beta.sup_C * factor(b + cert.K());
  out.calA = tau_beta.from_x * factor(V_x + b);
  out.calB = tau_beta.from_pi * factor(pi_V + b);
  return out;
}

GeometricNormBundle geometric_drift_norms(const DriftCertificate& cert, double kappa, double s, double V_x,
                                          double pi_C, bool x_in_C) {
  require_geometric(cert);
  require(kappa >= 0.0, "kappa must be nonnegative");
  require(s > 0.0, "s must be positive");
  require(V_x >= 1.0, "V(x) must be at least 1");
  const double lam = cert.lambda();
  const double b = cert.b();
  const double K = cert.K();
  const double alpha = 1.0 / (s + 1.0);

  GeometricNormBundle out;
  out.alpha = alpha;
  out.pi_V_bound = b * pi_C / lam;
  // pi V >= 1 because V >= 1, so the logarithm is taken of at least 1.
  const double log_piV = std::log(std::max(out.pi_V_bound, 1.0));
  if (s <= 1.0) {
    out.pi_g_bound = kappa * std::pow(log_piV, s);
  } else {
    out.pi_g_bound = kappa * (std::pow(log_piV + (s - 1.0), s) - std::pow(s - 1.0, s));
  }
  if (kappa == 0.0) return out;

  const TauNorms tn = tau_psi1_norms(cert, V_x, out.pi_V_bound, pi_C, x_in_C);
  const double mean_part = std::pow(kLn2, alpha - 1.0) * std::pow(out.pi_g_bound / kappa, alpha);
  auto bracket = [&](double level) {
    return std::pow(std::pow(log2_ratio_floor1(level), 1.0 - alpha) + mean_part, 1.0 / alpha);
  };
  out.calA_drift = kappa * tn.from_x * bracket(V_x / lam + b / lam);
  out.calB_drift = kappa * tn.from_pi * bracket(out.pi_V_bound / lam + b / lam);
  out.calC_drift = kappa * tn.sup_C * bracket(b / lam + K / lam);
  return out;
}

double bound_d(const DriftCertificate& cert, double delta) {
  require_geometric(cert);
  const double lam = cert.lambda();
  return 2.0 * solve_r(delta) * log2_ratio_floor1(cert.b() / (1.0 - lam) + cert.K()) / std::log(1.0 / (1.0 - lam));
}

double bound_e(const DriftCertificate& cert, double delta, double V_x, bool x_in_C) {
  require_geometric(cert);
  const double lam = cert.lambda();
  const double in_C_level = cert.b() / (1.0 - lam) + cert.K();
  const double from_x = std::log(x_in_C ? in_C_level : V_x) / kLn2;
  const double m = std::max({from_x, std::log(in_C_level) / kLn2, 1.0});
  return solve_r(delta) * (m + 1.0) / std::log(1.0 / (1.0 - lam));
}

double sigma_upper(double c, double alpha) {
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  require(c >= 0.0, "c must be nonnegative");
  return 2.0 / std::sqrt(alpha) * std::sqrt(gamma_fn(2.0 / alpha)) * c;
}

MultiplicativeDriftBound multiplicative_drift_bound(double c, double b, double K, double V_x, bool x_in_C) {
  require(c >= 0.0 && b >= 0.0, "c and b must be nonnegative");
  MultiplicativeDriftBound out;
  out.psi1_bound = std::max(1.0, (b + K) / kLn2) * c;
  out.moment_bound = std::exp((x_in_C ? b : 0.0) + V_x);
  return out;
}

MultiplicativeDriftCheck check_multiplicative_drift(const LatticeChain& model, const std::function<double(double)>& V,
                                                    const std::function<double(double)>& g_log_mgf, double b,
                                                    std::span<const std::int64_t> grid, double tol) {
  require(!grid.empty(), "grid must be nonempty");
  MultiplicativeDriftCheck out;
  out.max_violation = -std::numeric_limits<double>::infinity();
  for (std::int64_t x : grid) {
    const double vx = V(static_cast<double>(x));
    // log sum_y P^m(x,y) exp(V(y) - V(x)), shifted for stability.
    const Row row = model.power_row(x, model.m());
    double shift = -std::numeric_limits<double>::infinity();
    for (const auto& t : row) shift = std::max(shift, V(static_cast<double>(t.to)) - vx);
    CompensatedSum acc;
    for (const auto& t : row) acc.add(t.prob * std::exp(V(static_cast<double>(t.to)) - vx - shift));
    const double lhs = shift + std::log(acc.value());
    const double viol =
        lhs + g_log_mgf(static_cast<double>(x)) - (model.in_small_set(x) ? b : 0.0);
    if (viol > out.max_violation) {
      out.max_violation = viol;
      out.worst_state = static_cast<double>(x);
    }
  }
  out.status = out.max_violation <= tol ? Status::Pass : Status::Fail;
  return out;
}

MonteCarloMean estimate_excursion_mgf(const LatticeChain& model, const std::function<double(double)>& g,
                                      std::int64_t x, std::size_t replicas, RandomStream& rng,
                                      std::size_t max_steps) {
  require(replicas >= 2, "need at least two replicas");
  CompensatedSum sum;
  CompensatedSum sum_sq;
  for (std::size_t i = 0; i < replicas; ++i) {
    std::int64_t cur = x;
    double acc = 0.0;
    for (std::size_t k = 0;; ++k) {
      if (k >= max_steps) throw NoRegeneration("excursion did not reach the small set");
      acc += g(static_cast<double>(cur));
      if (model.in_small_set(cur)) break;
      for (int j = 0; j < model.m(); ++j) cur = model.step(cur, rng);
    }
    const double v = std::exp(acc);
    sum.add(v);
    sum_sq.add(v * v);
  }
  const double R = static_cast<double>(replicas);
  MonteCarloMean out;
  out.replicas = replicas;
  out.mean = sum.value() / R;
  const double var = std::max(0.0, (sum_sq.value() - R * out.mean * out.mean) / (R - 1.0));
  out.std_error = std::sqrt(var / R);
  return out;
}

const char* to_string(NormSource s) {
  switch (s) {
    case NormSource::DriftDerived:
      return "drift_derived";
    case NormSource::Empirical:
      return "empirical";
    case NormSource::UserSupplied:
      return "user_supplied";
  }
  return "unknown";
}

BlockNormSet certify_geometric(const DriftCertificate& cert, double delta, double kappa, double s, double V_x,
                               double pi_C, bool x_in_C) {
  BlockNormSet out;
  out.drift = geometric_drift_norms(cert, kappa, s, V_x, pi_C, x_in_C);
  out.alpha = out.drift.alpha;
  out.calA = out.drift.calA_drift;
  out.calB = out.drift.calB_drift;
  out.calC = out.drift.calC_drift;
  out.calD = out.drift.calC_drift;
  out.delta = delta;
  out.r = solve_r(delta);
  const OrliczTriple abc = combine_orlicz(out.alpha, out.calA, out.calB, out.calC, out.calD, out.r);
  out.a = abc.a;
  out.b = abc.b;
  out.c = abc.c;
  out.d = bound_d(cert, delta);
  out.e = bound_e(cert, delta, V_x, x_in_C);
  out.pi_theta = 1.0;
  out.pi_theta_inv = out.d;
  const double S = sigma_upper(out.c, out.alpha);
  out.sigma_cap = out.pi_theta * S * S;
  out.source = NormSource::DriftDerived;
  return out;
}

nlohmann::json to_json(const BlockNormSet& set) {
  return nlohmann::json{{"alpha", set.alpha},
                        {"r", set.r},
                        {"delta", set.delta},
                        {"calA", set.calA},
                        {"calB", set.calB},
                        {"calC", set.calC},
                        {"calD", set.calD},
                        {"a", set.a},
                        {"b", set.b},
                        {"c", set.c},
                        {"d", set.d},
                        {"e", set.e},
                        {"pi_theta", set.pi_theta},
                        {"pi_theta_inv", set.pi_theta_inv},
                        {"sigma_cap", set.sigma_cap},
                        {"pi_g_bound", set.drift.pi_g_bound},
                        {"pi_V_bound", set.drift.pi_V_bound},
                        {"provenance", to_string(set.source)}};
}

}  // namespace mcconc
