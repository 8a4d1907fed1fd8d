#include "mcconc/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "mcconc/errors.hpp"

namespace mcconc {

namespace {

constexpr std::size_t kMaxRejections = 100'000'000;

template <class Chain, class State>
void skeleton_step(const Chain& model, SplitTrajectory<State>& traj, RandomStream& rng) {
  const State x = traj.states.back();
  const int m = traj.m;
  const bool in_C = model.in_small_set(x);
  traj.visits.push_back(in_C ? 1 : 0);
  if (!in_C) {
    State cur = x;
    for (int j = 0; j < m; ++j) {
      cur = model.step(cur, rng);
      traj.states.push_back(cur);
    }
    traj.levels.push_back(0);
    return;
  }
  const bool level = rng.bernoulli(model.delta());
  std::vector<State> path(static_cast<std::size_t>(m));
  for (std::size_t attempt = 0;; ++attempt) {
    if (attempt >= kMaxRejections) throw Error("split-chain rejection sampler did not accept a path");
    State cur = x;
    for (int j = 0; j < m; ++j) {
      cur = model.step(cur, rng);
      path[static_cast<std::size_t>(j)] = cur;
    }
    double p = model.regeneration_probability(x, cur);
    if (p > 1.0 + 1e-12) {
      std::ostringstream os;
      os << "residual kernel negative: delta nu / P^m = " << p << " at transition " << x << " -> " << cur;
      throw ResidualKernelNegative(os.str());
    }
    p = std::clamp(p, 0.0, 1.0);
    if (level ? rng.bernoulli(p) : rng.bernoulli(1.0 - p)) break;
  }
  traj.states.insert(traj.states.end(), path.begin(), path.end());
  traj.levels.push_back(level ? 1 : 0);
}

template <class Chain, class State>
void extend_impl(const Chain& model, SplitTrajectory<State>& traj, std::size_t max_states, std::size_t n,
                 RandomStream& rng) {
  while (traj.states.size() < max_states) {
    skeleton_step(model, traj, rng);
    if (traj.states.size() >= n && !traj.levels.empty() && traj.levels.back() == 1 &&
        ledger_closes(traj.levels, traj.m, n))
      return;
  }
}

template <class Chain, class State>
SplitTrajectory<State> simulate_split_impl(const Chain& model, std::size_t n, State start, RandomStream& rng) {
  const int m = model.m();
  require(n >= static_cast<std::size_t>(m) && n >= 1, "simulate_split needs n >= m");
  SplitTrajectory<State> traj;
  traj.m = m;
  traj.initial = start;
  traj.states.reserve(n + static_cast<std::size_t>(m) + 1);
  traj.states.push_back(start);
  while (traj.states.size() < n) skeleton_step(model, traj, rng);
  return traj;
}

template <class Chain, class State>
SplitTrajectory<State> simulate_regenerative_impl(const Chain& model, std::size_t n, State start,
                                                  RandomStream& rng) {
  SplitTrajectory<State> traj = simulate_split_impl(model, n, start, rng);
  std::size_t horizon = n;
  for (int doubling = 0; doubling <= 6 && !ledger_closes(traj.levels, traj.m, n); ++doubling) {
    if (doubling > 0) horizon *= 2;
    extend_impl(model, traj, horizon + 1, n, rng);
  }
  if (!ledger_closes(traj.levels, traj.m, n)) {
    std::ostringstream os;
    os << "no regeneration closes the horizon n = " << n << " within " << traj.states.size()
       << " states; increase n or check the small set";
    throw NoRegeneration(os.str());
  }
  return traj;
}

template <class Chain, class State>
std::vector<State> simulate_direct_impl(const Chain& model, std::size_t n, State start, RandomStream& rng) {
  std::vector<State> out;
  out.reserve(n);
  State x = start;
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back(x);
    x = model.step(x, rng);
  }
  return out;
}

template <class State>
RegenerationLedger extract_impl(const SplitTrajectory<State>& traj, const std::function<double(State)>& f,
                                std::size_t n) {
  require(n >= 1 && traj.states.size() >= n, "trajectory shorter than the ledger horizon");
  const std::size_t m = static_cast<std::size_t>(traj.m);
  RegenerationLedger L;
  L.n = n;
  L.m = traj.m;

  std::vector<std::size_t> all;
  for (std::size_t k = 0; k < traj.levels.size(); ++k)
    if (traj.levels[k]) all.push_back(k);
  if (all.empty()) throw NoRegeneration("sigma(0) not observed in the trajectory");
  std::size_t N = all.size();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (m * all[i] + m - 1 >= n - 1) {
      N = i;
      break;
    }
  }
  if (N == all.size()) throw NoRegeneration("no regeneration at or after time n - 1 in the trajectory");
  L.N = N;
  L.sigma.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(N) + 1);
  for (std::size_t k = 0; k <= L.sigma.back(); ++k)
    if (traj.visits[k]) L.tauC.push_back(k);

  auto sum_range = [&](std::size_t lo, std::size_t hi) {  // inclusive
    double s = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) s += f(traj.states[k]);
    return s;
  };

  for (std::size_t j = 0; j < n / m; ++j) L.Z.push_back(sum_range(j * m, j * m + m - 1));
  L.U_signed = sum_range(0, std::min(m * L.sigma[0] + m - 1, n - 1));
  for (std::size_t i = 0; i < N; ++i) {
    L.blocks.push_back(sum_range(m * (L.sigma[i] + 1), m * L.sigma[i + 1] + m - 1));
    L.block_lengths.push_back(L.sigma[i + 1] - L.sigma[i]);
    L.Vsum += L.blocks.back();
  }
  L.W_signed = N > 0 ? sum_range(n, m * L.sigma[N] + m - 1) : 0.0;
  L.U = std::abs(L.U_signed);
  L.W = std::abs(L.W_signed);
  L.sum_f = sum_range(0, n - 1);
  return L;
}

}  // namespace

bool ledger_closes(std::span<const std::uint8_t> levels, int m, std::size_t n) {
  const std::size_t mm = static_cast<std::size_t>(m);
  for (std::size_t k = levels.size(); k-- > 0;) {
    if (mm * k + mm - 1 < n - 1) return false;
    if (levels[k]) return true;
  }
  return false;
}

LatticeTrajectory simulate_split(const LatticeChain& model, std::size_t n, std::int64_t start, RandomStream& rng) {
  return simulate_split_impl(model, n, start, rng);
}
RealTrajectory simulate_split(const RealLineChain& model, std::size_t n, double start, RandomStream& rng) {
  return simulate_split_impl(model, n, start, rng);
}

void extend_split(const LatticeChain& model, LatticeTrajectory& traj, std::size_t max_states, std::size_t n,
                  RandomStream& rng) {
  extend_impl(model, traj, max_states, n, rng);
}
void extend_split(const RealLineChain& model, RealTrajectory& traj, std::size_t max_states, std::size_t n,
                  RandomStream& rng) {
  extend_impl(model, traj, max_states, n, rng);
}

LatticeTrajectory simulate_regenerative(const LatticeChain& model, std::size_t n, std::int64_t start,
                                        RandomStream& rng) {
  return simulate_regenerative_impl(model, n, start, rng);
}
RealTrajectory simulate_regenerative(const RealLineChain& model, std::size_t n, double start, RandomStream& rng) {
  return simulate_regenerative_impl(model, n, start, rng);
}

std::vector<std::int64_t> simulate_direct(const LatticeChain& model, std::size_t n, std::int64_t start,
                                          RandomStream& rng) {
  return simulate_direct_impl(model, n, start, rng);
}
std::vector<double> simulate_direct(const RealLineChain& model, std::size_t n, double start, RandomStream& rng) {
  return simulate_direct_impl(model, n, start, rng);
}

RegenerationLedger extract_ledger(const LatticeTrajectory& traj, const std::function<double(std::int64_t)>& f,
                                  std::size_t n) {
  return extract_impl(traj, f, n);
}
RegenerationLedger extract_ledger(const RealTrajectory& traj, const std::function<double(double)>& f,
                                  std::size_t n) {
  return extract_impl(traj, f, n);
}

void write_ledger(const RegenerationLedger& ledger, std::uint64_t seed, const std::filesystem::path& csv_path,
                  const std::filesystem::path& json_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw Error("cannot write " + csv_path.string());
  csv.precision(17);
  csv << "i,sigma,s\n";
  for (std::size_t i = 0; i < ledger.blocks.size(); ++i)
    csv << i << ',' << ledger.sigma[i] << ',' << ledger.blocks[i] << '\n';
  nlohmann::json header = {{"n", ledger.n},   {"m", ledger.m},        {"seed", seed},
                           {"N", ledger.N},   {"U", ledger.U},        {"W", ledger.W},
                           {"Vsum", ledger.Vsum}, {"blocks", ledger.blocks.size()}};
  std::ofstream js(json_path);
  if (!js) throw Error("cannot write " + json_path.string());
  js << header.dump(2) << '\n';
}

namespace {

std::vector<double> lag_correlations(const std::vector<std::vector<double>>& series, double mean, double var,
                                     int max_lag) {
  std::vector<double> out;
  for (int k = 1; k <= max_lag; ++k) {
    double acc = 0.0;
    std::size_t count = 0;
    for (const auto& s : series) {
      for (std::size_t i = 0; i + static_cast<std::size_t>(k) < s.size(); ++i) {
        acc += (s[i] - mean) * (s[i + static_cast<std::size_t>(k)] - mean);
        ++count;
      }
    }
    out.push_back(count > 0 && var > 0.0 ? acc / static_cast<double>(count) / var : 0.0);
  }
  return out;
}

double far_lag_statistic(const std::vector<double>& corr) {
  double t = 0.0;
  for (std::size_t k = 1; k < corr.size(); ++k) t = std::max(t, std::abs(corr[k]));
  return t;
}

}  // namespace

DependenceReport block_dependence_report(const std::vector<std::vector<double>>& series, std::uint64_t seed,
                                         int permutations) {
  DependenceReport rep;
  double sum = 0.0;
  for (const auto& s : series) {
    rep.blocks += s.size();
    for (double v : s) sum += v;
  }
  if (rep.blocks < 1000) throw InsufficientBlocks("dependence report needs at least 1000 pooled blocks");
  const double mean = sum / static_cast<double>(rep.blocks);
  double var = 0.0;
  for (const auto& s : series)
    for (double v : s) var += (v - mean) * (v - mean);
  var /= static_cast<double>(rep.blocks);
  rep.band = 3.0 / std::sqrt(static_cast<double>(rep.blocks));
  rep.lag_correlation = lag_correlations(series, mean, var, 5);

  const double observed = far_lag_statistic(rep.lag_correlation);
  RandomStream rng(seed);
  auto shuffled = series;
  int exceed = 0;
  for (int p = 0; p < permutations; ++p) {
    for (auto& s : shuffled) {
      for (std::size_t i = s.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.next_u64() % i);
        std::swap(s[i - 1], s[j]);
      }
    }
    if (far_lag_statistic(lag_correlations(shuffled, mean, var, 5)) >= observed) ++exceed;
  }
  rep.p_value = (1.0 + exceed) / (1.0 + permutations);
  return rep;
}

DependenceReport block_dependence_report(std::span<const RegenerationLedger> ledgers, std::uint64_t seed,
                                         int permutations) {
  std::vector<std::vector<double>> series;
  for (const auto& l : ledgers) series.push_back(l.blocks);
  return block_dependence_report(series, seed, permutations);
}

}  // namespace mcconc
