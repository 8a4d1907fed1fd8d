#include "mcconc/worked_examples.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mcconc/errors.hpp"
#include "mcconc/numerics.hpp"

namespace mcconc {

double geometric_example_lambda(double rho, double A) {
  return 1.0 - 1.0 / (2.0 * A) - rho * A / 2.0 - (1.0 - rho) / 2.0;
}

double geometric_target_mean(double rho) { return rho / (1.0 - rho); }

GeometricExample geometric_example(double rho, double A) {
  require(rho > 0.0 && rho < 1.0, "rho must lie in (0, 1)");
  if (!(A > 1.0 && A < 1.0 / rho)) {
    std::ostringstream os;
    os << "A = " << A << " outside (1, 1/rho) = (1, " << 1.0 / rho << ")";
    throw InvalidA(os.str());
  }
  const double lambda = geometric_example_lambda(rho, A);
  if (!(lambda > 0.0)) throw InvalidA("drift rate lambda_A is not positive for this A");
  auto kernel = std::make_shared<const GeometricMetropolisKernel>(rho);
  LatticeSmallSet C;
  C.members = {0};
  C.delta = 1.0;
  C.nu = kernel->row(0);
  C.m = 1;
  LatticeChain chain(kernel, C);
  const double b = (A - 1.0) / 2.0;
  DriftCertificate cert =
      DriftCertificate::geometric([A](double i) { return std::pow(A, i + 1.0); }, lambda, b, A);
  return GeometricExample{rho, A, lambda, b, A, 1.0, 1.0 - rho, kernel, std::move(chain), std::move(cert)};
}

LogConcaveDrift logconcave_drift_constants(const SymmetricProposal& q, double xstar) {
  require(xstar > 0.0, "x* must be positive");
  auto dens = [&q](double z) { return q.density(z); };
  const double tail = integrate_upper_tail(dens, xstar);
  const double body = integrate(dens, 0.0, xstar);
  const double shaped = integrate(
      [&q](double z) {
        const double u = -std::expm1(-z);
        return q.density(z) * u * u;
      },
      0.0, xstar);
  LogConcaveDrift out;
  out.lambda = shaped - 2.0 * tail;
  out.b = (1.0 + 2.0 * tail + 2.0 * std::exp(xstar) * body) * kE;
  return out;
}

double logconcave_delta(const SymmetricProposal& q, const SymmetricTarget& target, double xstar) {
  // Both proposal families decrease in |z|, so the infimum sits at |y - x| = 2 x*.
  return target.mass(-xstar, xstar) * q.density(2.0 * xstar) / target.sup_on(-xstar, xstar);
}

LogConcaveExample logconcave_example(const SymmetricProposal& q, const SymmetricTarget& target, double xstar) {
  if (!(xstar > target.tail_threshold())) {
    std::ostringstream os;
    os << "x* = " << xstar << " must exceed the log-concave tail threshold " << target.tail_threshold();
    throw PreconditionError(os.str());
  }
  const LogConcaveDrift dc = logconcave_drift_constants(q, xstar);
  if (!(dc.lambda > 0.0)) {
    std::ostringstream os;
    os << "lambda = " << dc.lambda << " <= 0 at x* = " << xstar << "; increase x*";
    throw NegativeLambda(os.str());
  }
  const double delta = logconcave_delta(q, target, xstar);
  RealLineChain chain(MetropolisRealKernel(q, target), IntervalSmallSet{-xstar, xstar, delta, 1});
  const double K = std::exp(xstar + 1.0);
  DriftCertificate cert =
      DriftCertificate::geometric([](double x) { return std::exp(std::abs(x) + 1.0); }, dc.lambda, dc.b, K);
  const double pi_C = chain.pi_C();
  return LogConcaveExample{q, target, xstar, dc.lambda, dc.b, K, delta, pi_C, std::move(chain), std::move(cert)};
}

ScanResult scan_xstar(const SymmetricProposal& q, const SymmetricTarget& target, const std::vector<double>& grid,
                      const ScanSettings& settings) {
  require(!grid.empty(), "x* grid is empty");
  ScanResult out;
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (double xs : grid) {
    ScanRow row;
    row.xstar = xs;
    const LogConcaveDrift dc = logconcave_drift_constants(q, xs);
    row.lambda = dc.lambda;
    row.b = dc.b;
    row.delta = logconcave_delta(q, target, xs);
    row.feasible = dc.lambda > 0.0 && dc.lambda < 1.0 && xs > target.tail_threshold();
    if (row.feasible) {
      const LogConcaveExample ex = logconcave_example(q, target, xs);
      DriftBoundInputs in;
      in.cert = &ex.cert;
      in.delta = ex.delta;
      in.pi_C = ex.pi_C;
      in.kappa = settings.kappa;
      in.s = settings.s;
      in.V_x = ex.cert.V(settings.start);
      in.x_in_C = std::abs(settings.start) <= xs;
      in.eta = settings.eta;
      in.n = settings.n;
      const DriftBoundResult res = drift_bound(in);
      row.bound = res.curve.evaluate(settings.t);
      row.raw_bound = res.curve.raw_sum(settings.t);
      if (row.raw_bound < best) {
        best = row.raw_bound;
        out.best_xstar = xs;
      }
      any = true;
    } else {
      row.bound = 1.0;
      row.raw_bound = std::numeric_limits<double>::infinity();
    }
    out.table.push_back(row);
  }
  if (!any) throw AllInfeasible("lambda <= 0 at every x* on the grid");
  return out;
}

double hilbert_expectation_bound(double a, double b, double c, double pi_theta, double alpha, std::size_t n) {
  const UWExpectationBounds uw = uw_expectation_bounds(a, b, pi_theta, alpha);
  return uw.EU + uw.EW + 2.0 * sigma_upper(c, alpha) * std::sqrt(static_cast<double>(n));
}

HilbertReport hilbert_example_bound(const EmpiricalProcessParams& p) {
  require(p.n >= 1, "n must be positive");
  const double E = hilbert_expectation_bound(p.a, p.b, p.c, 1.0 / p.pi_theta_inv, p.alpha, p.n);
  const double n = static_cast<double>(p.n);
  TailBoundCurve base = empirical_process_curve(p);
  return HilbertReport{E, (1.0 + 7.0 * p.eps) * E / n, base.rescaled(n, "hilbert_lln")};
}

nlohmann::json to_json(const GeometricExample& ex) {
  return nlohmann::json{{"model", "geometric"}, {"rho", ex.rho},     {"A", ex.A},         {"lambda", ex.lambda},
                        {"b", ex.b},            {"K", ex.K},         {"delta", ex.delta}, {"pi_C", ex.pi_C},
                        {"small_set", {0}},     {"V", "A^(i+1)"}};
}

nlohmann::json to_json(const LogConcaveExample& ex) {
  return nlohmann::json{{"model", "logconcave"},
                        {"proposal", ex.q.name()},
                        {"proposal_scale", ex.q.scale()},
                        {"target", ex.target.name()},
                        {"target_param", ex.target.param()},
                        {"xstar", ex.xstar},
                        {"lambda", ex.lambda},
                        {"b", ex.b},
                        {"K", ex.K},
                        {"delta", ex.delta},
                        {"pi_C", ex.pi_C},
                        {"small_set", {-ex.xstar, ex.xstar}},
                        {"V", "exp(|x|+1)"}};
}

}  // namespace mcconc
