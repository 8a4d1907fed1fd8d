#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mcconc/errors.hpp"
#include "mcconc/worked_examples.hpp"
#include "oracles.hpp"

using namespace mcconc;

namespace {
// Independent delta: pi(C) q(2x*) / sup_C pi for the N(0,1) target and Laplace(1) proposal.
double delta_oracle(double X) {
  const double piC = std::erf(X / std::sqrt(2.0));
  const double peak = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return piC * 0.5 * std::exp(-2.0 * X) / peak;
}
}  // namespace

TEST_CASE("geometric example constants") {
  const GeometricExample ex = geometric_example(0.5, 1.2);
  CHECK(ex.lambda == doctest::Approx(1.0 / 30.0).epsilon(1e-12));
  CHECK(ex.b == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(ex.K == doctest::Approx(1.2));
  CHECK(ex.pi_C == doctest::Approx(0.5));
  CHECK(ex.delta == 1.0);
  CHECK(geometric_target_mean(0.5) == doctest::Approx(1.0));
}

TEST_CASE("geometric example rejects A outside (1, 1/rho)") {
  CHECK_THROWS_AS(geometric_example(0.5, 1.0), InvalidA);
  CHECK_THROWS_AS(geometric_example(0.5, 2.0), InvalidA);
  CHECK_THROWS_AS(geometric_example(0.5, 2.5), InvalidA);
  CHECK_NOTHROW(geometric_example(0.5, 1.9));
}

TEST_CASE("log-concave drift constants match the closed-form antiderivatives") {
  const auto q = SymmetricProposal::laplace(1.0);
  for (double X : {2.0, 3.0, 4.0}) {
    const LogConcaveDrift dc = logconcave_drift_constants(q, X);
    CHECK(std::abs(dc.lambda - oracle::laplace_lambda(X)) <= 1e-10);
    CHECK(std::abs(dc.b - oracle::laplace_b(X)) <= 1e-10);
  }
  const LogConcaveDrift at3 = logconcave_drift_constants(q, 3.0);
  CHECK(at3.lambda == doctest::Approx(0.0932048719025).epsilon(1e-11));
  CHECK(at3.b == doctest::Approx(54.7334853163808).epsilon(1e-12));
  CHECK(logconcave_drift_constants(q, 2.0).lambda < 0.0);
}

TEST_CASE("log-concave minorization constant") {
  const auto q = SymmetricProposal::laplace(1.0);
  const auto target = SymmetricTarget::gaussian(1.0);
  for (double X : {2.0, 2.5, 3.0, 4.0}) CHECK(logconcave_delta(q, target, X) == doctest::Approx(delta_oracle(X)).epsilon(1e-12));
  CHECK(logconcave_delta(q, target, 2.0) == doctest::Approx(0.0219).epsilon(0.01));
  CHECK(logconcave_delta(q, target, 3.0) == doctest::Approx(0.0031).epsilon(0.02));
}

TEST_CASE("log-concave example preconditions") {
  const auto q = SymmetricProposal::laplace(1.0);
  const auto target = SymmetricTarget::gaussian(1.0);
  CHECK_THROWS_AS(logconcave_example(q, target, 2.0), PreconditionError);  // not beyond the tail threshold
  CHECK_THROWS_AS(logconcave_example(q, target, 2.1), NegativeLambda);
  const LogConcaveExample ex = logconcave_example(q, target, 3.0);
  CHECK(ex.K == doctest::Approx(std::exp(4.0)));
  CHECK(ex.pi_C == doctest::Approx(std::erf(3.0 / std::sqrt(2.0))).epsilon(1e-12));
}

TEST_CASE("scan over x*: lambda increases and delta decreases") {
  const auto q = SymmetricProposal::laplace(1.0);
  const auto target = SymmetricTarget::gaussian(1.0);
  ScanSettings st;
  st.kappa = 1.0;
  st.n = 4096;
  st.t = 1e6;
  const std::vector<double> grid{2.0, 2.5, 3.0, 3.5, 4.0, 5.0};
  const ScanResult res = scan_xstar(q, target, grid, st);
  REQUIRE(res.table.size() == grid.size());
  CHECK_FALSE(res.table[0].feasible);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    CHECK(res.table[i].lambda > res.table[i - 1].lambda);
    CHECK(res.table[i].delta < res.table[i - 1].delta);
  }
  CHECK(res.best_xstar >= 2.5);
  CHECK_THROWS_AS(scan_xstar(q, target, {0.5, 1.0}, st), AllInfeasible);
}

TEST_CASE("vector-valued expectation bound") {
  const double a = 10.0, b = 20.0, c = 5.0, pi = 0.1, al = 0.5;
  const std::size_t n = 1000;
  const double expected = oracle::uw_EU(a, al) + oracle::uw_EW(b, pi, al) +
                          4.0 / std::sqrt(al) * std::sqrt(std::tgamma(2.0 / al)) * c * std::sqrt(double(n));
  CHECK(hilbert_expectation_bound(a, b, c, pi, al, n) == doctest::Approx(expected).epsilon(1e-13));

  EmpiricalProcessParams p;
  p.a = a;
  p.b = b;
  p.c = c;
  p.d = 10.0;
  p.sigma2 = 4.0;
  p.pi_theta = pi;
  p.pi_theta_inv = 1.0 / pi;
  p.n = n;
  p.alpha = al;
  p.eps = 0.1;
  const HilbertReport rep = hilbert_example_bound(p);
  CHECK(rep.expectation_bound == doctest::Approx(expected).epsilon(1e-13));
  CHECK(rep.lln_offset == doctest::Approx(1.7 * expected / n).epsilon(1e-13));
  const auto base = empirical_process_curve(p);
  CHECK(rep.lln_curve.raw_sum(0.3) == doctest::Approx(base.raw_sum(300.0)).epsilon(1e-15));
  CHECK(rep.lln_curve.valid_from() == doctest::Approx(base.valid_from() / n));
}

TEST_CASE("examples serialize") {
  CHECK(to_json(geometric_example(0.5, 1.2)).at("model") == "geometric");
  const auto ex = logconcave_example(SymmetricProposal::laplace(1.0), SymmetricTarget::gaussian(1.0), 3.0);
  CHECK(to_json(ex).at("xstar") == 3.0);
}
