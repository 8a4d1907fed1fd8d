// One PASS/FAIL line per acceptance criterion. `--only ID` runs one of them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "curve_sweep.hpp"
#include "mcconc/constants.hpp"
#include "mcconc/errors.hpp"
#include "mcconc/estimators.hpp"
#include "mcconc/experiment.hpp"
#include "mcconc/splitting.hpp"
#include "mcconc/worked_examples.hpp"
#include "oracles.hpp"

using namespace mcconc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome splitting_root() {
  bool ok = solve_r(1.0) == 1.0;
  double worst_res = 0.0;
  double worst_gap = -1.0;
  for (int i = 0; i < 100; ++i) {
    const double delta = std::pow(10.0, -6.0 + 6.0 * i / 99.0);
    const double r = solve_r(delta);
    worst_res = std::max(worst_res, std::abs(oracle::r_residual(r, delta)));
    worst_gap = std::max(worst_gap, r - oracle::r_upper(delta));
  }
  ok = ok && worst_res <= 1e-12 && worst_gap <= 0.0;
  return {ok, fmt("solve_r(1) = %.17g, max |residual| = %.3g, max(r - upper) = %.3g", solve_r(1.0), worst_res,
                  worst_gap)};
}

Outcome exact_drift() {
  const GeometricExample ex = geometric_example(0.5, 1.2);
  const auto grid = lattice_grid(0, 500);
  const DriftReport rep = verify_drift(ex.chain, ex.cert, grid);
  const bool lambda_ok = std::abs(ex.lambda - oracle::geometric_lambda(0.5, 1.2)) <= 1e-15;
  const bool ok = rep.status == Status::Pass && rep.exact && rep.max_violation <= 1e-12 && lambda_ok;
  return {ok, fmt("lambda = %.15g, b = %.15g, max normalized violation = %.3g over 0..500", ex.lambda, ex.b,
                  rep.max_violation)};
}

Outcome block_mean() {
  const GeometricExample ex = geometric_example(0.5, 1.2);
  const double target = 1.0 / (ex.delta * (1.0 - 0.5));
  std::vector<double> s;
  for (std::uint64_t rep = 0; s.size() < 10000; ++rep) {
    RandomStream rng = RandomStream::derive(3, rep);
    const auto traj = simulate_regenerative(ex.chain, 4000, 0, rng);
    const auto L = extract_ledger(traj, [](std::int64_t) { return 1.0; }, 4000);
    s.insert(s.end(), L.blocks.begin(), L.blocks.end());
  }
  s.resize(10000);
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= double(s.size());
  double var = 0.0;
  for (double v : s) var += (v - mean) * (v - mean);
  const double se = std::sqrt(var / double(s.size() - 1) / double(s.size()));
  return {std::abs(mean - target) <= 3.0 * se,
          fmt("mean s_i(1) = %.5f, target 1/(delta pi(C)) = %.5f, stderr = %.5f", mean, target, se)};
}

Outcome marginal_fidelity() {
  const GeometricExample ex = geometric_example(0.5, 1.2);
  const int R = 100000;
  std::map<std::int64_t, double> split_law;
  std::map<std::int64_t, double> direct_law;
  for (int i = 0; i < R; ++i) {
    RandomStream a = RandomStream::derive(11, i);
    RandomStream b = RandomStream::derive(12, i);
    split_law[simulate_split(ex.chain, 51, 0, a).states[50]] += 1.0 / R;
    direct_law[simulate_direct(ex.chain, 51, 0, b)[50]] += 1.0 / R;
  }
  std::map<std::int64_t, double> diff = split_law;
  for (const auto& [x, p] : direct_law) diff[x] -= p;
  double tv = 0.0;
  for (const auto& [x, d] : diff) tv += std::abs(d);
  tv /= 2.0;
  return {tv < 0.02, fmt("TV(split X_50, direct X_50) = %.5f over %d replicas each", tv, R)};
}

ExperimentConfig geometric_config(std::vector<std::size_t> n, std::size_t replicas, std::uint64_t seed) {
  json doc = {{"command", "verify"},
              {"seed", seed},
              {"replicas", replicas},
              {"model", {{"kind", "geometric"}, {"rho", 0.5}, {"A", 1.2}}},
              {"function", "identity"},
              {"n", n},
              {"t_grid", {{"lo", 0.25}, {"hi", 5.0}, {"count", 20}, {"scale", "sqrt_n"}}},
              {"bound", {{"eta", 0.5}, {"s", 1.0}}}};
  return parse_config(doc);
}

const std::vector<std::size_t> kDominationN{1u << 10, 1u << 12, 1u << 14};

Outcome domination() {
  const ExperimentConfig cfg = geometric_config(kDominationN, 10000, 2024);
  const ModelInstance model = build_model(cfg);
  bool ok = true;
  std::ostringstream os;
  os << "kappa = " << model.kappa << ";";
  for (std::size_t n : cfg.n) {
    const DriftBoundResult res = drift_bound(drift_inputs(model, cfg, n));
    const auto grid = cfg.t_grid.grid_for(n);
    const auto dev = replica_deviations(model, cfg.start, n, cfg.replicas, cfg.seed, 1);
    const Verdict v = domination_verdict(empirical_tail(dev, grid), res.curve);
    ok = ok && v.status == Status::Pass && v.checked == grid.size();
    os << fmt(" n=%zu: %s (%zu points, worst margin %.3g)", n, to_string(v.status), v.checked, v.worst_margin);
  }
  return {ok, os.str()};
}

Outcome informativeness() {
  const ExperimentConfig cfg = geometric_config(kDominationN, 10000, 2024);
  const ModelInstance model = build_model(cfg);
  bool ok = true;
  std::ostringstream os;
  for (std::size_t n : cfg.n) {
    const TailBoundCurve curve = drift_bound(drift_inputs(model, cfg, n)).curve;
    const double t0 = 0.5 * std::pow(double(n), 0.8);
    const double at = curve.evaluate(t0);
    ok = ok && at < 1.0;
    // Smallest informative t, by bisection on the monotone curve.
    double lo = t0;
    double hi = t0;
    while (curve.evaluate(hi) >= 1.0 && hi < 1e300) hi *= 2.0;
    while (hi / lo > 1.0 + 1e-6) {
      const double mid = std::sqrt(lo * hi);
      (curve.evaluate(mid) < 1.0 ? hi : lo) = mid;
    }
    os << fmt(" n=%zu: curve(0.5 n^0.8 = %.4g) = %.6g, first t with curve < 1 = %.4g;", n, t0, at, hi);
  }
  return {ok, os.str()};
}

Outcome psi1_oracle() {
  RandomStream rng(6);
  std::vector<double> x(1000000);
  for (auto& v : x) v = rng.exponential();
  const double c = estimate_psi_alpha(x, 1.0);
  return {std::abs(c - 2.0) <= 0.1, fmt("psi_1 estimate = %.5f (exact 2)", c)};
}

Outcome one_dependence() {
  const LogConcaveExample ex =
      logconcave_example(SymmetricProposal::laplace(1.0), SymmetricTarget::gaussian(1.0), 3.0);
  std::vector<RegenerationLedger> ledgers;
  std::size_t blocks = 0;
  for (std::uint64_t rep = 0; blocks < 10000; ++rep) {
    RandomStream rng = RandomStream::derive(7, rep);
    const auto traj = simulate_regenerative(ex.chain, 20000, 0.0, rng);
    ledgers.push_back(extract_ledger(traj, [](double x) { return x; }, 20000));
    blocks += ledgers.back().blocks.size();
  }
  const DependenceReport rep = block_dependence_report(ledgers, 7);
  const double lag2 = rep.lag_correlation.at(1);
  const double band = 3.0 / std::sqrt(double(rep.blocks));
  return {std::abs(lag2) < band, fmt("%zu blocks, lag-1 corr = %.4f, lag-2 corr = %.4f, band = %.4f, p = %.3f",
                                     rep.blocks, rep.lag_correlation.at(0), lag2, band, rep.p_value)};
}

Outcome variance_consistency() {
  const ExperimentConfig cfg = geometric_config({1u << 16}, 1000, 1);
  const ModelInstance model = build_model(cfg);
  const auto& ex = std::get<GeometricExample>(model.example);
  const std::size_t n = 1u << 16;
  const std::size_t runs = 64;
  std::vector<RegenerationLedger> ledgers;
  std::vector<std::vector<double>> series;
  for (std::size_t i = 0; i < runs; ++i) {
    RandomStream rng = RandomStream::derive(8, i);
    const auto traj = simulate_regenerative(ex.chain, n, 0, rng);
    const auto centred = [&](std::int64_t x) { return model.g(double(x)) - model.mean; };
    ledgers.push_back(extract_ledger(traj, centred, n));
    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k) s[k] = centred(traj.states[k]);
    series.push_back(std::move(s));
  }
  const VarianceEstimate est = estimate_sigma2(ledgers, series);
  const double cap = drift_bound(drift_inputs(model, cfg, n)).params.sigma2;
  const double rel = std::abs(est.sigma2_regen - est.sigma2_batch) / est.sigma2_batch;
  const bool ok = rel <= 0.10 && cap > est.sigma2_regen && cap > est.sigma2_batch;
  return {ok, fmt("regeneration %.4f, batch means %.4f (batch size %zu), relative gap %.3f, drift cap %.4g",
                  est.sigma2_regen, est.sigma2_batch, est.batch_size, rel, cap)};
}

Outcome truncation_mgf() {
  RandomStream rng(9);
  const WeibullTruncationCheck w = weibull_truncation_check(0.5, 1.0, 10000, 1000, rng);
  const double bound = std::exp(8.0);
  return {w.mgf.mean <= bound, fmt("MC mean = %.6g (stderr %.3g), bound e^8 = %.6g; truncation level %.4g, "
                                   "E excess %.3g",
                                   w.mgf.mean, w.mgf.std_error, bound, w.level, w.mean_excess)};
}

Outcome curve_sweep() {
  const sweep::Report rep = sweep::run(1000, 10);
  const bool ok = rep.failures.empty() && rep.max_rel_error <= 1e-12;
  std::string detail = fmt("%zu draws, %zu term checks, max rel error %.3g (%s), %zu property failures", rep.draws,
                           rep.term_checks, rep.max_rel_error, rep.worst_curve.c_str(), rep.failures.size());
  if (!rep.failures.empty()) detail += "; first: " + rep.failures.front();
  return {ok, detail};
}

Outcome quadrature_and_scan() {
  const SymmetricProposal q = SymmetricProposal::laplace(1.0);
  double worst = 0.0;
  for (double X : {2.0, 3.0, 4.0}) {
    const LogConcaveDrift d = logconcave_drift_constants(q, X);
    worst = std::max({worst, std::abs(d.lambda - oracle::laplace_lambda(X)), std::abs(d.b - oracle::laplace_b(X))});
  }
  ScanSettings settings;
  settings.n = 1 << 12;
  settings.t = 1e5;
  const std::vector<double> grid{2.5, 3.0, 3.5, 4.0, 5.0, 6.0};
  const ScanResult res = scan_xstar(q, SymmetricTarget::gaussian(1.0), grid, settings);
  bool trends = res.table.size() == grid.size();
  for (std::size_t i = 1; i < res.table.size(); ++i) {
    trends = trends && res.table[i].lambda > res.table[i - 1].lambda && res.table[i].delta < res.table[i - 1].delta;
  }
  return {worst <= 1e-10 && trends,
          fmt("max |quadrature - closed form| = %.3g; lambda %.4f -> %.4f, delta %.4g -> %.4g over x* in [2.5, 6]",
              worst, res.table.front().lambda, res.table.back().lambda, res.table.front().delta,
              res.table.back().delta)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::path(MCCONC_TEST_TMP) / "determinism";
  fs::remove_all(root);
  ExperimentConfig cfg = geometric_config({1u << 10, 1u << 12}, 10000, 77);
  cfg.output_dir = root / "a";
  run_experiment(cfg);
  cfg.output_dir = root / "b";
  run_experiment(cfg);
  std::size_t files = 0;
  bool same = true;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    ++files;
    same = same && slurp(entry.path()) == slurp(root / "b" / entry.path().filename());
  }
  return {same && files >= 4, fmt("%zu artifacts compared byte for byte: %s", files, same ? "identical" : "differ")};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria{
    {"1", splitting_root},       {"2", exact_drift},          {"3", block_mean},
    {"4", marginal_fidelity},    {"5a", domination},          {"5b", informativeness},
    {"6", psi1_oracle},          {"7", one_dependence},       {"8", variance_consistency},
    {"9", truncation_mgf},     {"10", curve_sweep},         {"11", quadrature_and_scan},
    {"12", determinism}};

}  // namespace

int main(int argc, char** argv) {
  std::string only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = argv[++i];
  }
  int failures = 0;
  bool matched = false;
  for (const auto& [id, fn] : kCriteria) {
    if (!only.empty() && id != only) continue;
    matched = true;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %-3s %s  %s  [%.1f s]\n", id.c_str(), out.pass ? "PASS" : "FAIL", out.detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  if (!matched) {
    std::fprintf(stderr, "unknown criterion '%s'\n", only.c_str());
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
