#include <doctest.h>

#include <cmath>
#include <fstream>

#include "curve_sweep.hpp"
#include "mcconc/bounds.hpp"
#include "mcconc/worked_examples.hpp"

using namespace mcconc;

TEST_CASE("every curve matches its transcription oracle on random draws") {
  const sweep::Report rep = sweep::run(1000, 20240611);
  INFO("worst term: " << rep.worst_curve);
  CHECK(rep.max_rel_error <= 1e-12);
  for (const auto& f : rep.failures) FAIL_CHECK(f);
  CHECK(rep.term_checks > 20000);
}

TEST_CASE("term helpers at the edges") {
  CHECK(weibull_term(2.0, 0.0, 1.0, 0.5) == 2.0);
  CHECK(weibull_term(2.0, 1.0, 0.0, 0.5) == 0.0);
  CHECK(subgaussian_term(3.0, 0.0, 1.0, 1.0) == 3.0);
  CHECK(subgaussian_term(3.0, 1.0, 0.0, 0.0) == 0.0);
  CHECK(truncation_level(2.0, 1.0, 1.0) == doctest::Approx(6.0));  // log floored at 1
}

TEST_CASE("rescaled curve evaluates terms at factor * s") {
  const auto base = bernstein_psi1_curve(2.0, 100);
  const auto r = base.rescaled(100.0, "per_step");
  CHECK(r.name() == "per_step");
  for (double s : {0.01, 0.1, 0.5}) CHECK(r.raw_sum(s) == doctest::Approx(base.raw_sum(100.0 * s)).epsilon(1e-15));
}

TEST_CASE("drift bound on the geometric example wires constants through") {
  const GeometricExample ex = geometric_example(0.5, 1.2);
  DriftBoundInputs in;
  in.cert = &ex.cert;
  in.delta = 1.0;
  in.pi_C = ex.pi_C;
  in.kappa = 1.0 / std::log(1.2);
  in.s = 1.0;
  in.V_x = ex.cert.V(0);
  in.x_in_C = true;
  in.eta = 0.5;
  in.n = 1024;
  const DriftBoundResult res = drift_bound(in);
  CHECK(res.params.a == doctest::Approx(res.norms.a));
  CHECK(res.params.pi_theta_inv == doctest::Approx(res.norms.d));
  CHECK(res.params.sigma2 == doctest::Approx(res.norms.sigma_cap));
  CHECK(res.curve.evaluate(10.0) == 1.0);
  CHECK(drift_bound_value(in, 1e10) < 1e-3);
}

TEST_CASE("curve export") {
  const auto c = bernstein_psi1_curve(1.0, 10);
  std::filesystem::create_directories(MCCONC_TEST_TMP);
  const std::filesystem::path path = std::filesystem::path(MCCONC_TEST_TMP) / "curve.csv";
  const std::vector<double> grid{0.0, 1.0, 2.0};
  write_curve_csv(c, grid, path);
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
  const auto side = curve_sidecar(c);
  CHECK(side.at("name") == "bernstein_psi1");
}
