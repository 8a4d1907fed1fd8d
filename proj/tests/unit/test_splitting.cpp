#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "mcconc/errors.hpp"
#include "mcconc/splitting.hpp"
#include "mcconc/worked_examples.hpp"

using namespace mcconc;

TEST_CASE("ledger_closes needs a regeneration at or after n - 1") {
  const std::vector<std::uint8_t> lv{0, 1, 0, 0, 1, 0};
  CHECK(ledger_closes(lv, 1, 5));
  CHECK(ledger_closes(lv, 1, 2));
  CHECK_FALSE(ledger_closes(lv, 1, 6));
  CHECK(ledger_closes(lv, 2, 8));  // k = 4 covers times 8..9
}

TEST_CASE("split trajectory has at least n states and consistent bookkeeping") {
  const GeometricExample ex = geometric_example(0.5, 1.2);
  RandomStream rng(42);
  const auto traj = simulate_split(ex.chain, 1000, 3, rng);
  CHECK(traj.states.size() >= 1000);
  CHECK(traj.states.front() == 3);
  CHECK(traj.levels.size() + 1 == traj.states.size());
  for (std::size_t k = 0; k < traj.levels.size(); ++k) {
    CHECK(traj.visits[k] == (traj.states[k] == 0));
    if (traj.levels[k]) CHECK(traj.visits[k]);  // Y_k = 1 only inside C
  }
}

TEST_CASE("ledger decomposition: U + sum of blocks - W equals the path sum") {
  const GeometricExample ex = geometric_example(0.5, 1.2);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RandomStream rng(seed);
    const auto traj = simulate_regenerative(ex.chain, 500, 4, rng);
    const auto L = extract_ledger(traj, [](std::int64_t x) { return double(x) - 1.0; }, 500);
    CHECK(L.U_signed + L.Vsum - L.W_signed == doctest::Approx(L.sum_f).epsilon(1e-12));
    CHECK(L.sigma.size() == L.N + 1);
    CHECK(L.blocks.size() == L.N);
    CHECK(L.Z.size() == 500);
    CHECK(std::accumulate(L.Z.begin(), L.Z.end(), 0.0) == doctest::Approx(L.sum_f));
    std::size_t total = 0;
    for (auto len : L.block_lengths) total += len;
    CHECK(total == L.sigma.back() - L.sigma.front());
  }
}

TEST_CASE("no regeneration raises NoRegeneration") {
  RealTrajectory t;
  t.states = {0.0, 1.0, 2.0};
  t.levels = {0, 0};
  t.visits = {1, 0};
  CHECK_THROWS_AS(extract_ledger(t, [](double x) { return x; }, 2), NoRegeneration);
}

TEST_CASE("split and direct simulation agree in law after 10 steps (small-sample TV)") {
  const GeometricExample ex = geometric_example(0.5, 1.2);
  const int R = 20000;
  std::map<std::int64_t, double> split_law, direct_law;
  for (int i = 0; i < R; ++i) {
    RandomStream a = RandomStream::derive(7, i);
    RandomStream b = RandomStream::derive(8, i);
    split_law[simulate_split(ex.chain, 11, 0, a).states[10]] += 1.0 / R;
    direct_law[simulate_direct(ex.chain, 11, 0, b)[10]] += 1.0 / R;
  }
  double tv = 0.0;
  for (std::int64_t x = 0; x < 40; ++x) tv += std::abs(split_law[x] - direct_law[x]);
  CHECK(tv / 2.0 < 0.03);
}

TEST_CASE("real-line split chain regenerates and its blocks are recorded") {
  const LogConcaveExample ex =
      logconcave_example(SymmetricProposal::laplace(1.0), SymmetricTarget::gaussian(1.0), 3.0);
  RandomStream rng(5);
  const auto traj = simulate_regenerative(ex.chain, 2000, 0.0, rng);
  const auto L = extract_ledger(traj, [](double x) { return x; }, 2000);
  CHECK(L.N > 0);
  CHECK(L.U_signed + L.Vsum - L.W_signed == doctest::Approx(L.sum_f).epsilon(1e-10));
}

TEST_CASE("dependence report on i.i.d. series is quiet") {
  RandomStream rng(3);
  std::vector<std::vector<double>> s(4, std::vector<double>(2000));
  for (auto& v : s)
    for (auto& x : v) x = rng.normal();
  const DependenceReport rep = block_dependence_report(s, 9);
  CHECK(rep.blocks == 8000);
  REQUIRE(rep.lag_correlation.size() == 5);
  for (double c : rep.lag_correlation) CHECK(std::abs(c) < rep.band);
  CHECK(rep.p_value > 0.001);
}

TEST_CASE("dependence report needs 1000 blocks") {
  std::vector<std::vector<double>> s{std::vector<double>(999, 1.0)};
  CHECK_THROWS_AS(block_dependence_report(s), InsufficientBlocks);
}

TEST_CASE("ledger CSV and JSON are written") {
  const GeometricExample ex = geometric_example(0.5, 1.2);
  RandomStream rng(1);
  const auto traj = simulate_regenerative(ex.chain, 200, 0, rng);
  const auto L = extract_ledger(traj, [](std::int64_t x) { return double(x); }, 200);
  std::filesystem::create_directories(MCCONC_TEST_TMP);
  const std::filesystem::path dir = MCCONC_TEST_TMP;
  write_ledger(L, 1, dir / "l.csv", dir / "l.json");
  CHECK(std::filesystem::file_size(dir / "l.csv") > 0);
  CHECK(std::filesystem::file_size(dir / "l.json") > 0);
}
