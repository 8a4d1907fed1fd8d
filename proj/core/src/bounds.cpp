#include "mcconc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "mcconc/errors.hpp"
#include "mcconc/numerics.hpp"

namespace mcconc {

namespace {

const double kE8 = std::exp(8.0);

double ceil_div(std::size_t n, std::size_t k) { return static_cast<double>((n + k - 1) / k); }

void require_alpha(double alpha) { require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]"); }

}  // namespace

TailBoundCurve::TailBoundCurve(std::string name, std::vector<BoundTerm> terms, nlohmann::json params,
                               double valid_from)
    : name_(std::move(name)), terms_(std::move(terms)), params_(std::move(params)), valid_from_(valid_from) {}

double TailBoundCurve::raw_sum(double t) const {
  double s = 0.0;
  for (const auto& term : terms_) s += term.fn(t);
  return s;
}

double TailBoundCurve::evaluate(double t) const {
  if (t < valid_from_) return 1.0;
  return std::min(1.0, raw_sum(t));
}

std::vector<double> TailBoundCurve::breakdown(double t) const {
  std::vector<double> out;
  out.reserve(terms_.size());
  for (const auto& term : terms_) out.push_back(term.fn(t));
  return out;
}

TailBoundCurve TailBoundCurve::rescaled(double factor, std::string name) const {
  require(factor > 0.0, "rescaling factor must be positive");
  std::vector<BoundTerm> terms;
  for (const auto& term : terms_) {
    auto fn = term.fn;
    terms.push_back({term.label, [fn, factor](double s) { return fn(factor * s); }});
  }
  nlohmann::json params = params_;
  params["rescaled_by"] = factor;
  return TailBoundCurve(std::move(name), std::move(terms), std::move(params), valid_from_ / factor);
}

double weibull_term(double coef, double t, double scale, double alpha) {
  if (t <= 0.0) return coef;
  if (scale <= 0.0) return 0.0;
  return coef * std::exp(-std::pow(t / scale, alpha));
}

double subgaussian_term(double coef, double t, double variance, double range) {
  if (t <= 0.0) return coef;
  const double denom = 2.0 * (variance + range * t);
  if (denom <= 0.0) return 0.0;
  return coef * std::exp(-t * t / denom);
}

double truncation_level(double c, double alpha, double x) {
  return c * std::pow(3.0 / (alpha * alpha) * log_floor_e(x), 1.0 / alpha);
}

// ---------------------------------------------------------------------------

double general_markov_bound(double t, double a, double b, double c, double sigma2, double pi_theta, std::size_t n,
                            std::size_t m, double alpha) {
  return general_markov_curve(a, b, c, sigma2, pi_theta, n, m, alpha).evaluate(3.0 * t);
}

TailBoundCurve general_markov_curve(double a, double b, double c, double sigma2, double pi_theta, std::size_t n,
                                    std::size_t m, double alpha) {
  require_alpha(alpha);
  require(m >= 1 && n >= m && n % m == 0, "general Markov bound needs m | n");
  require(pi_theta > 0.0 && pi_theta <= 1.0, "pi_theta must lie in (0, 1]");
  const double M = truncation_level(c, alpha, static_cast<double>(n) / static_cast<double>(m));
  const double blocks = ceil_div(n, 2 * m);
  std::vector<BoundTerm> terms{
      {"start", [=](double u) { return weibull_term(2.0, u / 3.0, a, alpha); }},
      {"end", [=](double u) { return weibull_term(2.0 / pi_theta, u / 3.0, b, alpha); }},
      {"truncated", [=](double u) { return weibull_term(2.0 * kE8, u / 3.0, std::pow(2.0, 1.0 / alpha) * 4.0 * c, alpha); }},
      {"subgaussian",
       [=](double u) {
         const double t = u / 3.0;
         return subgaussian_term(4.0, t, 16.0 * blocks * sigma2, 16.0 * M / 6.0);
       }},
  };
  nlohmann::json params{{"a", a},         {"b", b}, {"c", c}, {"sigma2", sigma2}, {"pi_theta", pi_theta},
                        {"n", n},         {"m", m}, {"alpha", alpha}, {"M", M},
                        {"index", "deviation u; terms evaluated at u/3"}};
  return TailBoundCurve("general_markov", std::move(terms), std::move(params));
}

// ---------------------------------------------------------------------------

TailBoundCurve geometric_curve(const GeometricBoundParams& p) {
  require_alpha(p.alpha);
  require(p.eta > 0.0 && p.eta <= 1.0, "eta must lie in (0, 1]");
  require(p.pi_theta_inv >= 1.0, "pi_theta_inv must be at least 1");
  const double eta = p.eta;
  const double alpha = p.alpha;
  const double sigma = std::sqrt(p.sigma2);
  const double M = std::pow(1.0 + eta, 0.75) *
                   std::max(4.0 * truncation_level(p.c, alpha, static_cast<double>(p.n)) / 3.0,
                            29.0 * p.pi_theta * p.d * sigma / eta);
  const double variance = (1.0 + eta) * p.sigma2 * static_cast<double>(p.n);
  const double coef4 = std::pow(2.0, 1.0 + eta / (2.0 + eta));
  // (eta t)^alpha / (2 * 14^alpha c^alpha) = ((eta t) / (2^{1/alpha} 14 c))^alpha
  const double scale3 = std::pow(2.0, 1.0 / alpha) * 14.0 * p.c / eta;
  std::vector<BoundTerm> terms{
      {"start", [=](double t) { return weibull_term(2.0, t, 25.0 * p.a / eta, alpha); }},
      {"end", [=](double t) { return weibull_term(2.0 * p.pi_theta_inv, t, 25.0 * p.b / eta, alpha); }},
      {"truncated", [=](double t) { return weibull_term(kE8, t, scale3, alpha); }},
      {"subgaussian", [=](double t) { return subgaussian_term(coef4, t, variance, M); }},
  };
  nlohmann::json params{{"a", p.a},           {"b", p.b},         {"c", p.c},
                        {"d", p.d},           {"sigma2", p.sigma2}, {"pi_theta", p.pi_theta},
                        {"pi_theta_inv", p.pi_theta_inv}, {"n", p.n}, {"alpha", alpha},
                        {"eta", eta},         {"M", M}};
  return TailBoundCurve("geometric", std::move(terms), std::move(params));
}

double geometric_bound(double t, double a, double b, double c, double d, double sigma2, double pi_theta,
                       std::size_t n, double alpha, double eta) {
  GeometricBoundParams p{a, b, c, d, sigma2, pi_theta, 1.0 / pi_theta, n, alpha, eta};
  return geometric_curve(p).evaluate(t);
}

TailBoundCurve geometric_pq_curve(const GeometricPQParams& p) {
  require_alpha(p.alpha);
  require(p.p > 1.0, "p must exceed 1");
  require(p.eps > 0.0 && p.eps < 1.0, "eps must lie in (0, 1)");
  const double q = p.p / (p.p - 1.0);
  const double alpha = p.alpha;
  const double eps = p.eps;
  const double sigma = std::sqrt(p.sigma2);
  const double M = std::max(4.0 * truncation_level(p.c, alpha, static_cast<double>(p.n)) * (1.0 + eps) / 3.0,
                            12.0 * p.pi_theta * p.d * (1.0 + eps) * sigma / eps);
  const double variance = (1.0 + eps) * p.sigma2 * static_cast<double>(p.n);
  const double coef4 = std::pow(2.0, 1.0 + eps / (1.0 + eps));
  const double pp = p.p;
  const double scale3 = std::pow(2.0, 1.0 / alpha) * pp * q * p.c;
  std::vector<BoundTerm> terms{
      {"start", [=](double t) { return weibull_term(2.0, t, 2.0 * pp * p.a, alpha); }},
      {"end", [=](double t) { return weibull_term(2.0 * p.pi_theta_inv, t, 2.0 * pp * p.b, alpha); }},
      {"truncated", [=](double t) { return weibull_term(kE8, t, scale3, alpha); }},
      // q^{-4} t^2 / (2 (V + M t q^{-2})) = (t/q^2)^2 / (2 (V + M (t/q^2)))
      {"subgaussian", [=](double t) { return subgaussian_term(coef4, t / (q * q), variance, M); }},
  };
  nlohmann::json params{{"a", p.a},           {"b", p.b},         {"c", p.c},
                        {"d", p.d},           {"sigma2", p.sigma2}, {"pi_theta", p.pi_theta},
                        {"pi_theta_inv", p.pi_theta_inv}, {"n", p.n}, {"alpha", alpha},
                        {"p", pp},            {"q", q},           {"eps", eps}, {"M", M}};
  return TailBoundCurve("geometric_pq", std::move(terms), std::move(params));
}

GeometricPQParams pq_from_eta(const GeometricBoundParams& g) {
  GeometricPQParams p;
  p.a = g.a;
  p.b = g.b;
  p.c = g.c;
  p.d = g.d;
  p.sigma2 = g.sigma2;
  p.pi_theta = g.pi_theta;
  p.pi_theta_inv = g.pi_theta_inv;
  p.n = g.n;
  p.alpha = g.alpha;
  p.eps = std::sqrt(1.0 + g.eta) - 1.0;
  const double q = std::pow(1.0 + g.eta, 0.125);
  p.p = q / (q - 1.0);
  return p;
}

DriftBoundResult drift_bound(const DriftBoundInputs& in) {
  require(in.cert != nullptr, "drift bound needs a certificate");
  require(in.n >= 1, "n must be positive");
  BlockNormSet norms = certify_geometric(*in.cert, in.delta, in.kappa, in.s, in.V_x, in.pi_C, in.x_in_C);
  GeometricBoundParams p;
  p.a = norms.a;
  p.b = norms.b;
  p.c = norms.c;
  p.d = norms.d;
  p.sigma2 = norms.sigma_cap;
  p.pi_theta = norms.pi_theta;
  p.pi_theta_inv = norms.pi_theta_inv;
  p.n = in.n;
  p.alpha = norms.alpha;
  p.eta = in.eta;
  TailBoundCurve curve = geometric_curve(p);
  return {norms, p, std::move(curve)};
}

double drift_bound_value(const DriftBoundInputs& in, double t) { return drift_bound(in).curve.evaluate(t); }

// ---------------------------------------------------------------------------

double empirical_process_threshold(const EmpiricalProcessParams& p) {
  const double g1 = gamma_fn(1.0 + 1.0 / p.alpha);
  const double log_term = std::pow(std::log(kE * p.pi_theta_inv), 1.0 / p.alpha);
  return ((9.0 + 9.0 * p.e + 27.0 * p.pi_theta * p.d * p.d / p.eps) * p.pi_F + 9.0 * g1 * p.a +
          9.0 * std::pow(2.0, 1.0 / p.alpha - 1.0) * kE * g1 * log_term * p.b) /
         p.eps;
}

TailBoundCurve empirical_process_curve(const EmpiricalProcessParams& p) {
  require_alpha(p.alpha);
  require(p.eps > 0.0 && p.eps < 0.5, "eps must lie in (0, 1/2)");
  require(p.pi_theta_inv >= 1.0, "pi_theta_inv must be at least 1");
  const double eps = p.eps;
  const double alpha = p.alpha;
  const double n = static_cast<double>(p.n);
  const double M = truncation_level(p.c, alpha, n);
  const double D = klein_rio_D(eps);
  const double w = 1.0 - 2.0 * eps;
  const double w2 = w * w;
  const double valid_from = empirical_process_threshold(p);
  const double constant4 =
      (p.pi_theta * p.d * p.d > 0.0) ? kE * std::exp(-eps * eps * n / (144.0 * p.pi_theta * p.d * p.d)) : 0.0;
  std::vector<BoundTerm> terms{
      // (1-2e)^4 t^2 / (2 (1+e)^2 n s^2) = (w2 t)^2 / (2 (1+e)^2 n s^2)
      {"subgaussian", [=](double t) { return subgaussian_term(1.0, w2 * t, (1.0 + eps) * (1.0 + eps) * n * p.sigma2, 0.0); }},
      {"bounded_part", [=](double t) { return weibull_term(kE, t * w2, 2.0 * M * D, 1.0); }},
      {"truncated", [=](double t) { return weibull_term(kE8, eps * w * t, std::pow(2.0, 1.0 / alpha) * p.c, alpha); }},
      {"regeneration_count", [=](double) { return constant4; }},
      {"start", [=](double t) { return weibull_term(2.0, eps * t, 2.0 * p.a, alpha); }},
      {"end", [=](double t) { return weibull_term(2.0 * p.pi_theta_inv, eps * t, 2.0 * p.b, alpha); }},
  };
  nlohmann::json params{{"a", p.a},       {"b", p.b},         {"c", p.c},   {"d", p.d},
                        {"e", p.e},       {"sigma2", p.sigma2}, {"pi_theta", p.pi_theta},
                        {"pi_theta_inv", p.pi_theta_inv},       {"pi_F", p.pi_F}, {"n", p.n},
                        {"alpha", alpha}, {"eps", eps},       {"M", M},     {"C_eps", valid_from}};
  return TailBoundCurve("empirical_process", std::move(terms), std::move(params), valid_from);
}

double empirical_process_bound(double t, const EmpiricalProcessParams& p) {
  return empirical_process_curve(p).evaluate(t);
}

// ---------------------------------------------------------------------------

TailBoundCurve independent_onedep_curve(double c, double sigma2, std::size_t n, std::size_t m, double alpha) {
  require_alpha(alpha);
  require(m >= 1 && n >= 1, "n and m must be positive");
  const double M = truncation_level(c, alpha, static_cast<double>(n) / static_cast<double>(m));
  const double blocks = ceil_div(n, 2 * m);
  std::vector<BoundTerm> terms{
      {"truncated", [=](double t) { return weibull_term(2.0 * kE8, t, std::pow(2.0, 1.0 / alpha) * 4.0 * c, alpha); }},
      // t^2 / (32 (B s^2 + M t / 6)) = t^2 / (2 (16 B s^2 + 16 M t / 6))
      {"subgaussian", [=](double t) { return subgaussian_term(4.0, t, 16.0 * blocks * sigma2, 16.0 * M / 6.0); }},
  };
  nlohmann::json params{{"c", c}, {"sigma2", sigma2}, {"n", n}, {"m", m}, {"alpha", alpha}, {"M", M}};
  return TailBoundCurve("independent_onedep", std::move(terms), std::move(params));
}

double independent_onedep_bound(double t, double c, double sigma2, std::size_t n, std::size_t m, double alpha) {
  return independent_onedep_curve(c, sigma2, n, m, alpha).evaluate(t);
}

double stopped_mu(double c, double sigma2, std::size_t n, double alpha, double eps, double psi1_excess) {
  const double M = truncation_level(c, alpha, static_cast<double>(n));
  const double first = M > 0.0 ? 3.0 / (4.0 * M * (1.0 + eps)) : std::numeric_limits<double>::infinity();
  const double denom = (1.0 + eps) * std::sqrt(sigma2) * std::sqrt(psi1_excess);
  const double second = denom > 0.0 ? std::sqrt(eps) / denom : std::numeric_limits<double>::infinity();
  return std::min(first, second);
}

TailBoundCurve independent_stopped_curve(double c, double sigma2, std::size_t n, double alpha, double eps,
                                         double a_center, double psi1_excess, double p) {
  require_alpha(alpha);
  require(p > 1.0, "p must exceed 1");
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  require(a_center > 0.0 && psi1_excess >= 0.0, "a must be positive and the psi_1 excess nonnegative");
  const double q = p / (p - 1.0);
  const double mu = stopped_mu(c, sigma2, n, alpha, eps, psi1_excess);
  const double range = std::isinf(mu) ? 0.0 : 1.0 / mu;
  const double variance = (1.0 + eps) * a_center * sigma2;
  const double coef = std::pow(2.0, 1.0 + eps / (1.0 + eps));
  std::vector<BoundTerm> terms{
      {"truncated", [=](double t) { return weibull_term(kE8, t / p, std::pow(2.0, 1.0 / alpha) * c, alpha); }},
      // q^{-2} t^2 / (2 (V + mu^{-1} t q^{-1})) = (t/q)^2 / (2 (V + (t/q) / mu))
      {"subgaussian", [=](double t) { return subgaussian_term(coef, t / q, variance, range); }},
  };
  nlohmann::json params{{"c", c},     {"sigma2", sigma2}, {"n", n},     {"alpha", alpha}, {"eps", eps},
                        {"a", a_center}, {"psi1_excess", psi1_excess}, {"p", p}, {"q", q},
                        {"mu", std::isinf(mu) ? -1.0 : mu}};
  return TailBoundCurve("independent_stopped", std::move(terms), std::move(params));
}

double independent_stopped_bound(double t, double c, double sigma2, std::size_t n, double alpha, double eps,
                                 double a_center, double psi1_excess, double p) {
  return independent_stopped_curve(c, sigma2, n, alpha, eps, a_center, psi1_excess, p).evaluate(t);
}

TailBoundCurve bernstein_psi1_curve(double c, std::size_t n) {
  require(c > 0.0, "c must be positive");
  const double nn = static_cast<double>(n);
  // t^2 / (4 n c^2 + 2 c t) = t^2 / (2 (2 n c^2 + c t))
  std::vector<BoundTerm> terms{
      {"bernstein", [=](double t) { return subgaussian_term(1.0, t, 2.0 * nn * c * c, c); }},
  };
  return TailBoundCurve("bernstein_psi1", std::move(terms), nlohmann::json{{"c", c}, {"n", n}});
}

double bernstein_psi1_tail(double t, double c, std::size_t n) { return bernstein_psi1_curve(c, n).evaluate(t); }

double NDeviation::tail(double k) const {
  if (k < threshold) return 1.0;
  const double scale = 36.0 * pi_theta * pi_theta * d * d / eps;
  return std::min(1.0, std::exp(-(k - pi_theta * static_cast<double>(n)) / scale));
}

NDeviation N_deviation_psi1(std::size_t n, double pi_theta, double d, double eps) {
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  require(pi_theta > 0.0 && pi_theta <= 1.0 && d >= 1.0, "need pi_theta in (0,1] and d >= 1");
  NDeviation out;
  out.pi_theta = pi_theta;
  out.d = d;
  out.eps = eps;
  out.n = n;
  out.threshold = pi_theta * static_cast<double>(n) * (1.0 + eps);
  out.psi1_excess = 144.0 * pi_theta * pi_theta * d * d / eps;
  return out;
}

double klein_rio_D(double eps) { return (1.0 + 1.0 / eps) * (3.0 + 4.0 / eps); }

TailBoundCurve klein_rio_curve(double sigma2, std::size_t n, double M, double ES, double eps) {
  require(eps > 0.0, "eps must be positive");
  require(M >= 0.0 && ES >= 0.0 && sigma2 >= 0.0, "M, ES and sigma^2 must be nonnegative");
  const double nn = static_cast<double>(n);
  const double D = klein_rio_D(eps);
  std::vector<BoundTerm> terms{
      {"subgaussian", [=](double t) { return subgaussian_term(1.0, t, (1.0 + eps) * nn * sigma2, 0.0); }},
      {"bounded_part", [=](double t) { return weibull_term(1.0, t, M * D, 1.0); }},
  };
  return TailBoundCurve("klein_rio", std::move(terms),
                        nlohmann::json{{"sigma2", sigma2}, {"n", n}, {"M", M}, {"ES", ES}, {"eps", eps}, {"D_eps", D}});
}

double klein_rio_tail(double t, double sigma2, std::size_t n, double M, double ES, double eps) {
  return klein_rio_curve(sigma2, n, M, ES, eps).evaluate(t);
}

double klein_rio_tail_plain(double t, double sigma2, std::size_t n, double M, double ES) {
  // 2 s^2 n + (4 ES + 3t) M = 2 (s^2 n + 2 ES M + 1.5 M t)
  return std::min(1.0, subgaussian_term(1.0, t, sigma2 * static_cast<double>(n) + 2.0 * ES * M, 1.5 * M));
}

TailBoundCurve truncated_empirical_curve(double c, double sigma2, std::size_t n, double alpha, double eps) {
  require_alpha(alpha);
  require(eps > 0.0 && eps < 0.5, "eps must lie in (0, 1/2)");
  const double nn = static_cast<double>(n);
  const double M = truncation_level(c, alpha, nn);
  const double w = 1.0 - 2.0 * eps;
  const double D = klein_rio_D(eps);
  std::vector<BoundTerm> terms{
      {"subgaussian", [=](double t) { return subgaussian_term(1.0, w * t, (1.0 + eps) * nn * sigma2, 0.0); }},
      {"bounded_part", [=](double t) { return weibull_term(kE, t * w, 2.0 * M * D, 1.0); }},
      {"truncated", [=](double t) { return weibull_term(kE8, eps * t, std::pow(2.0, 1.0 / alpha) * c, alpha); }},
  };
  return TailBoundCurve(
      "truncated_empirical", std::move(terms),
      nlohmann::json{{"c", c}, {"sigma2", sigma2}, {"n", n}, {"alpha", alpha}, {"eps", eps}, {"M", M}});
}

double truncated_empirical_bound(double t, double c, double sigma2, std::size_t n, double alpha, double eps) {
  return truncated_empirical_curve(c, sigma2, n, alpha, eps).evaluate(t);
}

UWExpectationBounds uw_expectation_bounds(double a, double b, double pi_theta, double alpha) {
  require_alpha(alpha);
  require(pi_theta > 0.0 && pi_theta <= 1.0, "pi_theta must lie in (0, 1]");
  const double g1 = gamma_fn(1.0 + 1.0 / alpha);
  UWExpectationBounds out;
  out.EU = 2.0 * g1 * a;
  out.EW = std::pow(2.0, 1.0 / alpha) * kE * g1 * std::pow(std::log(kE / pi_theta), 1.0 / alpha) * b;
  return out;
}

// ---------------------------------------------------------------------------

void write_curve_csv(const TailBoundCurve& curve, std::span<const double> grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  out << "t,total";
  for (std::size_t i = 0; i < curve.size(); ++i) out << ',' << curve.label(i);
  out << '\n';
  for (double t : grid) {
    out << t << ',' << curve.evaluate(t);
    for (double v : curve.breakdown(t)) out << ',' << v;
    out << '\n';
  }
}

nlohmann::json curve_sidecar(const TailBoundCurve& curve) {
  nlohmann::json labels = nlohmann::json::array();
  for (std::size_t i = 0; i < curve.size(); ++i) labels.push_back(curve.label(i));
  return nlohmann::json{
      {"name", curve.name()}, {"params", curve.params()}, {"valid_from", curve.valid_from()}, {"terms", labels}};
}

}  // namespace mcconc
