#include <doctest.h>

#include <cmath>

#include "mcconc/constants.hpp"
#include "mcconc/errors.hpp"
#include "mcconc/worked_examples.hpp"
#include "oracles.hpp"

using namespace mcconc;

TEST_CASE("splitting root: r = 1 at delta = 1") { CHECK(solve_r(1.0) == 1.0); }

TEST_CASE("splitting root: residual and closed-form upper bound on a log grid") {
  for (int i = 0; i < 100; ++i) {
    const double delta = std::pow(10.0, -6.0 + 6.0 * i / 99.0);
    const double r = solve_r(delta);
    CHECK(std::abs(oracle::r_residual(r, delta)) <= 1e-12);
    CHECK(r <= oracle::r_upper(delta) * (1.0 + 1e-12));
    CHECK(r >= 1.0);
  }
}

TEST_CASE("splitting root rejects delta outside (0, 1]") {
  CHECK_THROWS(solve_r(0.0));
  CHECK_THROWS(solve_r(1.5));
}

TEST_CASE("orlicz combination follows the three combination inequalities") {
  const double al = 0.5, A = 3.0, B = 7.0, C = 5.0, D = 2.0, r = 1.3;
  const OrliczTriple t = combine_orlicz(al, A, B, C, D, r);
  auto sum = [&](double x, double y) { return std::pow(std::pow(x, al) + std::pow(y, al), 1.0 / al); };
  CHECK(t.a == doctest::Approx(std::pow(r, 1.0 / al) * sum(std::max(A, C), D)).epsilon(1e-14));
  CHECK(t.b == doctest::Approx(std::pow(r, 1.0 / al) * sum(std::max(B, C), D)).epsilon(1e-14));
  CHECK(t.c == doctest::Approx(std::pow(r, 1.0 / al) * sum(C, D)).epsilon(1e-14));
}

TEST_CASE("sigma_upper matches the L2-from-psi_alpha bound") {
  for (double al : {0.25, 0.5, 1.0}) CHECK(sigma_upper(3.0, al) == doctest::Approx(oracle::sigma_from_c(3.0, al)).epsilon(1e-13));
}

TEST_CASE("geometric example block norms (frozen hand-derived values)") {
  const GeometricExample ex = geometric_example(0.5, 1.2);
  const double kappa = 1.0 / std::log(1.2);
  const BlockNormSet s = certify_geometric(ex.cert, 1.0, kappa, 1.0, ex.cert.V(0), ex.pi_C, true);
  CHECK(s.alpha == 0.5);
  CHECK(s.r == 1.0);
  CHECK(s.drift.calC_drift == doctest::Approx(1518.70).epsilon(1e-5));
  CHECK(s.drift.calB_drift == doctest::Approx(1750.07).epsilon(1e-5));
  CHECK(s.a == doctest::Approx(6074.79).epsilon(1e-6));
  CHECK(s.b == doctest::Approx(6529.33).epsilon(1e-6));
  CHECK(s.c == doctest::Approx(6074.79).epsilon(1e-6));
  CHECK(s.d == doctest::Approx(58.994).epsilon(1e-5));
  // d by its closed form: 2 r max(log(b/(1-l) + K)/log 2, 1) / log(1/(1-l))
  const double l = 1.0 / 30.0;
  const double d = 2.0 * std::max(std::log(0.1 / (1.0 - l) + 1.2) / std::log(2.0), 1.0) / std::log(1.0 / (1.0 - l));
  CHECK(bound_d(ex.cert, 1.0) == doctest::Approx(d).epsilon(1e-13));
  CHECK(s.pi_theta == 1.0);
  CHECK(s.pi_theta_inv == doctest::Approx(s.d));
  CHECK(s.sigma_cap == doctest::Approx(std::pow(oracle::sigma_from_c(s.c, 0.5), 2)).epsilon(1e-12));
}

TEST_CASE("drift-derived constants grow as delta shrinks") {
  const GeometricExample ex = geometric_example(0.5, 1.2);
  const double kappa = 1.0 / std::log(1.2);
  const BlockNormSet hi = certify_geometric(ex.cert, 1.0, kappa, 1.0, ex.cert.V(0), ex.pi_C, true);
  const BlockNormSet lo = certify_geometric(ex.cert, 0.3, kappa, 1.0, ex.cert.V(0), ex.pi_C, true);
  CHECK(lo.r > 1.0);
  CHECK(lo.a > hi.a);
  CHECK(lo.c > hi.c);
  CHECK(lo.d > hi.d);
}

TEST_CASE("regular drift norms need beta > alpha") {
  auto V = [](double x) { return std::exp(std::abs(x)); };
  auto h = [](double x) { return std::abs(x); };
  const DriftCertificate cert = DriftCertificate::regular(V, h, 0.5, 1.0, 2.0);
  CHECK_THROWS_AS(regular_drift_norms(0.5, cert, TauNorms{1.0, 1.0, 1.0}, 1.0, 1.0, 1.0), GammaUndefined);
}

TEST_CASE("multiplicative drift bound") {
  const auto m = multiplicative_drift_bound(2.0, 0.5, 1.0, 3.0, true);
  CHECK(m.psi1_bound == doctest::Approx(std::max(1.0, 1.5 / std::log(2.0)) * 2.0));
  CHECK(m.moment_bound == doctest::Approx(std::exp(3.5)));
}

TEST_CASE("excursion mgf Monte Carlo is finite for a contracting chain") {
  const GeometricExample ex = geometric_example(0.5, 1.2);
  RandomStream rng(2);
  const MonteCarloMean est = estimate_excursion_mgf(ex.chain, [](double) { return 0.01; }, 3, 2000, rng);
  CHECK(est.mean > 1.0);
  CHECK(std::isfinite(est.std_error));
}

TEST_CASE("BlockNormSet serializes with its provenance") {
  BlockNormSet s;
  const auto j = to_json(s);
  CHECK(j.at("provenance") == "drift_derived");
  CHECK(j.contains("sigma_cap"));
}
