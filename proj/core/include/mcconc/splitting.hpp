#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "mcconc/chain.hpp"
#include "mcconc/random.hpp"

namespace mcconc {

// Split chain path. levels[k] is the bit Y_k attached to skeleton time k;
// visits[k] records whether X_{km} lies in the small set. The states cover
// X_0 .. X_{m * levels.size()}.
template <class State>
struct SplitTrajectory {
  std::vector<State> states;
  std::vector<std::uint8_t> levels;
  std::vector<std::uint8_t> visits;
  int m = 1;
  State initial{};
};

using LatticeTrajectory = SplitTrajectory<std::int64_t>;
using RealTrajectory = SplitTrajectory<double>;

// Simulates until at least n states exist. Within C, Y_k = 1 with probability
// delta; the next skeleton path is then drawn from nu (Y_k = 1) or from the
// residual kernel (Y_k = 0), both by rejection on forward paths of P^m, which
// also yields the bridge law for the intermediate states.
LatticeTrajectory simulate_split(const LatticeChain& model, std::size_t n, std::int64_t start, RandomStream& rng);
RealTrajectory simulate_split(const RealLineChain& model, std::size_t n, double start, RandomStream& rng);

// Appends skeleton steps until traj holds max_states states or a regeneration
// closes the block containing time n - 1, whichever comes first.
void extend_split(const LatticeChain& model, LatticeTrajectory& traj, std::size_t max_states, std::size_t n,
                  RandomStream& rng);
void extend_split(const RealLineChain& model, RealTrajectory& traj, std::size_t max_states, std::size_t n,
                  RandomStream& rng);

// simulate_split followed by up to six doublings of the horizon until the
// ledger for horizon n can be closed. Throws NoRegeneration otherwise.
LatticeTrajectory simulate_regenerative(const LatticeChain& model, std::size_t n, std::int64_t start,
                                        RandomStream& rng);
RealTrajectory simulate_regenerative(const RealLineChain& model, std::size_t n, double start, RandomStream& rng);

std::vector<std::int64_t> simulate_direct(const LatticeChain& model, std::size_t n, std::int64_t start,
                                          RandomStream& rng);
std::vector<double> simulate_direct(const RealLineChain& model, std::size_t n, double start, RandomStream& rng);

// True when some regeneration k satisfies k m + m - 1 >= n - 1.
bool ledger_closes(std::span<const std::uint8_t> levels, int m, std::size_t n);

struct RegenerationLedger {
  std::size_t n = 0;
  int m = 1;
  std::size_t N = 0;
  std::vector<std::size_t> sigma;          // sigma(0..N)
  std::vector<std::size_t> tauC;           // skeleton visits to C up to sigma(N)
  std::vector<double> blocks;              // s_0 .. s_{N-1}
  std::vector<std::size_t> block_lengths;  // sigma(i+1) - sigma(i), in skeleton steps
  std::vector<double> Z;                   // Z_j for j < floor(n/m)
  double U = 0.0;
  double Vsum = 0.0;
  double W = 0.0;
  double U_signed = 0.0;
  double W_signed = 0.0;
  double sum_f = 0.0;  // sum_{k<n} f(X_k)
};

RegenerationLedger extract_ledger(const LatticeTrajectory& traj, const std::function<double(std::int64_t)>& f,
                                  std::size_t n);
RegenerationLedger extract_ledger(const RealTrajectory& traj, const std::function<double(double)>& f,
                                  std::size_t n);

// Block CSV (i, sigma_i, s_i) plus a JSON header with n, m, seed, N, U, W.
void write_ledger(const RegenerationLedger& ledger, std::uint64_t seed, const std::filesystem::path& csv_path,
                  const std::filesystem::path& json_path);

struct DependenceReport {
  std::vector<double> lag_correlation;  // lags 1..5
  double p_value = 1.0;                 // permutation test, statistic max_{k>=2} |corr_k|
  std::size_t blocks = 0;
  double band = 0.0;                    // 3 / sqrt(blocks)
};

DependenceReport block_dependence_report(std::span<const RegenerationLedger> ledgers, std::uint64_t seed = 1,
                                         int permutations = 199);
DependenceReport block_dependence_report(const std::vector<std::vector<double>>& series, std::uint64_t seed = 1,
                                         int permutations = 199);

}  // namespace mcconc
