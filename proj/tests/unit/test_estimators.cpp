#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mcconc/errors.hpp"
#include "mcconc/estimators.hpp"

using namespace mcconc;

TEST_CASE("psi_alpha of all-zero samples is 0") {
  std::vector<double> z(200, 0.0);
  CHECK(estimate_psi_alpha(z, 1.0) == 0.0);
}

TEST_CASE("psi_alpha of a constant sample is c0 / ln 2") {
  std::vector<double> s(500, 3.0);
  CHECK(estimate_psi_alpha(s, 1.0) == doctest::Approx(3.0 / std::log(2.0)).epsilon(1e-6));
  // alpha = 1/2: exp(sqrt(c0/c)) = 2 -> c = c0 / ln(2)^2
  CHECK(estimate_psi_alpha(s, 0.5) == doctest::Approx(3.0 / std::pow(std::log(2.0), 2)).epsilon(1e-6));
}

TEST_CASE("psi_alpha scales exactly with the data") {
  RandomStream rng(4);
  std::vector<double> s(5000);
  for (auto& x : s) x = rng.exponential() - 0.7;
  std::vector<double> scaled(s);
  for (auto& x : scaled) x *= 13.5;
  const double base = estimate_psi_alpha(s, 1.0);
  CHECK(estimate_psi_alpha(scaled, 1.0) == doctest::Approx(13.5 * base).epsilon(1e-6));
}

TEST_CASE("psi_1 of Exp(1) is near 2") {
  RandomStream rng(8);
  std::vector<double> s(200000);
  for (auto& x : s) x = rng.exponential();
  CHECK(estimate_psi_alpha(s, 1.0) == doctest::Approx(2.0).epsilon(0.08));
}

TEST_CASE("psi_alpha input checks") {
  CHECK_THROWS_AS(estimate_psi_alpha(std::vector<double>(50, 1.0), 1.0), InsufficientData);
  CHECK_THROWS(estimate_psi_alpha(std::vector<double>(200, 1.0), 1.5));
}

TEST_CASE("empirical tail matches brute-force counting") {
  RandomStream rng(12);
  std::vector<double> v(3000);
  for (auto& x : v) x = std::floor(rng.normal() * 4.0) / 4.0;  // ties on the grid
  const std::vector<double> grid{-2.0, -0.5, 0.0, 0.25, 1.0, 3.0};
  const EmpiricalTail tail = empirical_tail(v, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto count = std::count_if(v.begin(), v.end(), [&](double x) { return x > grid[i]; });
    CHECK(tail.prob[i] == double(count) / 3000.0);
    CHECK(tail.std_error[i] == doctest::Approx(std::sqrt(tail.prob[i] * (1 - tail.prob[i]) / 3000.0)));
  }
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(tail.prob[i] <= tail.prob[i - 1]);
}

TEST_CASE("empirical tail of symmetric values at 0 is one half") {
  RandomStream rng(13);
  std::vector<double> v(20000);
  for (auto& x : v) x = rng.normal();
  const std::vector<double> grid{0.0};
  const EmpiricalTail tail = empirical_tail(v, grid);
  CHECK(std::abs(tail.prob[0] - 0.5) <= 3.0 * tail.std_error[0]);
  CHECK(empirical_tail(std::vector<double>(1000, 0.0), std::vector<double>{1.0}).prob[0] == 0.0);
  CHECK_THROWS_AS(empirical_tail(std::vector<double>(999, 0.0), grid), InsufficientData);
}

namespace {
// Degenerate chain that regenerates every step: blocks are the draws themselves.
RegenerationLedger iid_ledger(const std::vector<double>& draws) {
  RegenerationLedger L;
  L.n = draws.size();
  L.blocks = draws;
  L.block_lengths.assign(draws.size(), 1);
  L.N = draws.size();
  return L;
}
}  // namespace

TEST_CASE("variance estimators on an i.i.d. unit-variance stream") {
  RandomStream rng(21);
  std::vector<double> draws(1 << 16);
  for (auto& x : draws) x = rng.normal();
  const std::vector<RegenerationLedger> ledgers{iid_ledger(draws)};
  const VarianceEstimate v = estimate_sigma2(ledgers, {draws});
  CHECK(std::abs(v.sigma2_regen - 1.0) <= std::max(v.ci_halfwidth, 0.02));
  CHECK(std::abs(v.sigma2_batch - 1.0) <= std::max(v.batch_ci_halfwidth, 0.05));
  CHECK(v.batch_size == 256);
  CHECK(v.pi_theta_hat == doctest::Approx(1.0));
}

TEST_CASE("variance of f = 0 is 0") {
  std::vector<double> zeros(4096, 0.0);
  const std::vector<RegenerationLedger> ledgers{iid_ledger(zeros)};
  const VarianceEstimate v = estimate_sigma2(ledgers, {zeros}, 32);
  CHECK(v.sigma2_regen == 0.0);
  CHECK(v.sigma2_batch == 0.0);
}

TEST_CASE("variance estimators report insufficient data") {
  const std::vector<RegenerationLedger> few{iid_ledger(std::vector<double>(999, 1.0))};
  CHECK_THROWS_AS(estimate_sigma2_regen(few), InsufficientData);
  CHECK_THROWS_AS(estimate_sigma2_batch({std::vector<double>(990, 1.0)}, 10), InsufficientData);
  CHECK(default_batch_size(1 << 16) == 256);
  CHECK(default_batch_size(1 << 12) == 64);
}

TEST_CASE("domination verdict edge cases") {
  RandomStream rng(1);
  std::vector<double> v(2000);
  for (auto& x : v) x = std::abs(rng.normal());
  const std::vector<double> grid{0.1, 0.5, 1.0, 2.0};
  const EmpiricalTail tail = empirical_tail(v, grid);
  const TailBoundCurve one("one", {{"one", [](double) { return 1.0; }}}, {});
  const TailBoundCurve zero("zero", {{"zero", [](double) { return 0.0; }}}, {});
  CHECK(domination_verdict(tail, one).status == Status::Pass);
  const Verdict bad = domination_verdict(tail, zero);
  CHECK(bad.status == Status::Fail);
  CHECK(bad.worst_t == 0.1);
  const TailBoundCurve late("late", {{"zero", [](double) { return 0.0; }}}, {}, 5.0);
  CHECK(domination_verdict(tail, late).status == Status::Pass);  // nothing in the valid range
}

TEST_CASE("truncation check on Weibull samples stays below e^8") {
  RandomStream rng(31);
  const WeibullTruncationCheck chk = weibull_truncation_check(0.5, 1.0, 2000, 200, rng);
  CHECK(chk.psi_norm == doctest::Approx(4.0));
  CHECK(chk.lambda == doctest::Approx(1.0 / 16.0));
  CHECK(chk.mgf.mean <= std::exp(8.0));
  CHECK(chk.mgf.mean >= 1.0);
}
