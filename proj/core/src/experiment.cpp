#include "mcconc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "mcconc/errors.hpp"
#include "mcconc/numerics.hpp"
#include "mcconc/splitting.hpp"

namespace mcconc {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Command c) {
  switch (c) {
    case Command::Certify: return "certify";
    case Command::Simulate: return "simulate";
    case Command::Verify: return "verify";
    case Command::Scan: return "scan";
    case Command::Report: return "report";
  }
  return "unknown";
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void bad_field(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

template <class T>
T get_field(const json& obj, const std::string& key, const std::string& path) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::out_of_range&) {
    bad_field(path + key, "missing");
  } catch (const json::type_error& e) {
    bad_field(path + key, std::string("wrong type (") + e.what() + ")");
  }
}

template <class T>
T get_or(const json& obj, const std::string& key, T fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  return get_field<T>(obj, key, path);
}

template <class T>
std::optional<T> get_opt(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) return std::nullopt;
  return get_field<T>(obj, key, path);
}

Command parse_command(const std::string& s) {
  if (s == "certify") return Command::Certify;
  if (s == "simulate") return Command::Simulate;
  if (s == "verify") return Command::Verify;
  if (s == "scan") return Command::Scan;
  if (s == "report") return Command::Report;
  bad_field("command", "unknown command '" + s + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

// Runs fn(i) for i in [0, count) on up to `threads` workers.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t replica_index(std::size_t n, std::size_t i) {
  return (static_cast<std::uint64_t>(n) << 32) ^ static_cast<std::uint64_t>(i);
}

json drift_json(const DriftReport& r) {
  return {{"status", to_string(r.status)}, {"max_violation", r.max_violation}, {"worst_state", r.worst_state},
          {"V_at_least_one", r.V_at_least_one}, {"K_dominates", r.K_dominates}, {"grid_points", r.states.size()}};
}

json minorization_json(const MinorizationReport& r) {
  return {{"status", to_string(r.status)}, {"min_slack", r.min_slack}, {"worst_state", r.worst_state},
          {"worst_set", r.worst_set}};
}

json curve_params_json(const DriftBoundResult& res) {
  const auto& p = res.params;
  return {{"a", p.a},         {"b", p.b},           {"c", p.c},
          {"d", p.d},         {"sigma2", p.sigma2}, {"pi_theta", p.pi_theta},
          {"pi_theta_inv", p.pi_theta_inv},         {"n", p.n},
          {"alpha", p.alpha}, {"eta", p.eta},       {"valid_from", res.curve.valid_from()}};
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

std::vector<double> TGridConfig::grid_for(std::size_t n) const {
  std::vector<double> g = values;
  if (g.empty()) g = linear_grid(lo, hi, count);
  double factor = 1.0;
  if (scale == "sqrt_n") factor = std::sqrt(static_cast<double>(n));
  if (scale == "n") factor = static_cast<double>(n);
  for (double& t : g) t *= factor;
  return g;
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  cfg.command = parse_command(get_or<std::string>(doc, "command", "verify", ""));
  if (!doc.contains("seed")) bad_field("seed", "missing (required for reproducibility)");
  cfg.seed = get_field<std::uint64_t>(doc, "seed", "");
  cfg.replicas = get_or<std::size_t>(doc, "replicas", cfg.replicas, "");
  if (cfg.replicas < 1) bad_field("replicas", "must be >= 1");
  cfg.threads = get_or<std::size_t>(doc, "threads", cfg.threads, "");
  cfg.output_dir = get_or<std::string>(doc, "output_dir", ".", "");
  cfg.function = get_or<std::string>(doc, "function", cfg.function, "");
  if (cfg.function != "identity" && cfg.function != "abs") bad_field("function", "expected 'identity' or 'abs'");
  cfg.start = get_or<double>(doc, "start", 0.0, "");

  if (cfg.command != Command::Report) {
    if (!doc.contains("model")) bad_field("model", "missing");
    const json& m = doc.at("model");
    const std::string kind = get_field<std::string>(m, "kind", "model.");
    if (kind == "geometric") {
      GeometricModelConfig g;
      g.rho = get_or<double>(m, "rho", g.rho, "model.");
      g.A = get_or<double>(m, "A", g.A, "model.");
      g.lambda = get_opt<double>(m, "lambda", "model.");
      g.b = get_opt<double>(m, "b", "model.");
      if (!(g.rho > 0.0 && g.rho < 1.0)) bad_field("model.rho", "must lie in (0, 1)");
      cfg.model = g;
    } else if (kind == "logconcave") {
      LogConcaveModelConfig l;
      l.proposal = get_or<std::string>(m, "proposal", l.proposal, "model.");
      l.proposal_scale = get_or<double>(m, "proposal_scale", l.proposal_scale, "model.");
      l.target = get_or<std::string>(m, "target", l.target, "model.");
      l.target_param = get_or<double>(m, "target_param", l.target_param, "model.");
      l.xstar = get_or<double>(m, "xstar", l.xstar, "model.");
      l.lambda = get_opt<double>(m, "lambda", "model.");
      l.b = get_opt<double>(m, "b", "model.");
      if (l.proposal != "laplace" && l.proposal != "gaussian") bad_field("model.proposal", "expected laplace or gaussian");
      if (l.target != "laplace" && l.target != "gaussian") bad_field("model.target", "expected laplace or gaussian");
      cfg.model = l;
    } else {
      bad_field("model.kind", "expected 'geometric' or 'logconcave'");
    }
  }

  if (doc.contains("bound")) {
    const json& b = doc.at("bound");
    cfg.bound.name = get_or<std::string>(b, "name", cfg.bound.name, "bound.");
    if (cfg.bound.name != "geometric_drift") bad_field("bound.name", "only 'geometric_drift' is available");
    cfg.bound.eta = get_or<double>(b, "eta", cfg.bound.eta, "bound.");
    cfg.bound.s = get_or<double>(b, "s", cfg.bound.s, "bound.");
    cfg.bound.kappa = get_opt<double>(b, "kappa", "bound.");
    if (!(cfg.bound.eta > 0.0)) bad_field("bound.eta", "must be positive");
  }

  if (doc.contains("n")) {
    const json& n = doc.at("n");
    if (n.is_array()) {
      cfg.n = get_field<std::vector<std::size_t>>(doc, "n", "");
    } else {
      cfg.n = {get_field<std::size_t>(doc, "n", "")};
    }
    for (std::size_t v : cfg.n)
      if (v < 1) bad_field("n", "entries must be >= 1");
  }
  if ((cfg.command == Command::Verify || cfg.command == Command::Simulate) && cfg.n.empty()) bad_field("n", "missing");

  if (doc.contains("t_grid")) {
    const json& t = doc.at("t_grid");
    cfg.t_grid.values = get_or<std::vector<double>>(t, "values", {}, "t_grid.");
    cfg.t_grid.scale = get_or<std::string>(t, "scale", "absolute", "t_grid.");
    if (cfg.t_grid.scale != "absolute" && cfg.t_grid.scale != "sqrt_n" && cfg.t_grid.scale != "n")
      bad_field("t_grid.scale", "expected absolute, sqrt_n or n");
    if (cfg.t_grid.values.empty()) {
      cfg.t_grid.lo = get_field<double>(t, "lo", "t_grid.");
      cfg.t_grid.hi = get_field<double>(t, "hi", "t_grid.");
      cfg.t_grid.count = get_field<std::size_t>(t, "count", "t_grid.");
      if (cfg.t_grid.count < 1) bad_field("t_grid.count", "must be >= 1");
      if (cfg.t_grid.count > 1 && !(cfg.t_grid.hi > cfg.t_grid.lo)) bad_field("t_grid", "hi must exceed lo");
    } else {
      for (std::size_t i = 1; i < cfg.t_grid.values.size(); ++i)
        if (!(cfg.t_grid.values[i] > cfg.t_grid.values[i - 1])) bad_field("t_grid.values", "must be strictly increasing");
    }
  } else if (cfg.command == Command::Verify) {
    bad_field("t_grid", "missing");
  }

  if (doc.contains("scan")) {
    const json& s = doc.at("scan");
    cfg.scan.xstar_grid = get_field<std::vector<double>>(s, "xstar_grid", "scan.");
    cfg.scan.n = get_or<std::size_t>(s, "n", cfg.scan.n, "scan.");
    cfg.scan.t = get_or<double>(s, "t", cfg.scan.t, "scan.");
  } else if (cfg.command == Command::Scan) {
    bad_field("scan", "missing");
  }
  if (cfg.command == Command::Scan && !std::holds_alternative<LogConcaveModelConfig>(cfg.model))
    bad_field("model.kind", "scan needs a logconcave model");

  if (doc.contains("inputs")) {
    for (const auto& p : get_field<std::vector<std::string>>(doc, "inputs", "")) cfg.inputs.emplace_back(p);
  } else if (cfg.command == Command::Report) {
    bad_field("inputs", "missing");
  }
  return cfg;
}

json load_config_document(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
  return doc;
}

ExperimentConfig load_config(const fs::path& path) { return parse_config(load_config_document(path)); }

// ---------------------------------------------------------------------------

bool ModelInstance::in_small_set(double x) const {
  return std::visit(
      [x](const auto& ex) {
        using T = std::decay_t<decltype(ex)>;
        if constexpr (std::is_same_v<T, GeometricExample>) {
          return ex.chain.in_small_set(static_cast<std::int64_t>(std::llround(x)));
        } else {
          return ex.chain.in_small_set(x);
        }
      },
      example);
}

double ModelInstance::delta() const {
  return std::visit([](const auto& ex) { return ex.delta; }, example);
}

double ModelInstance::pi_C() const {
  return std::visit([](const auto& ex) { return ex.pi_C; }, example);
}

double ModelInstance::g(double x) const { return function == "abs" ? std::abs(x) : x; }

ModelInstance build_model(const ExperimentConfig& cfg) {
  return std::visit(
      [&cfg](const auto& mc) -> ModelInstance {
        using T = std::decay_t<decltype(mc)>;
        if constexpr (std::is_same_v<T, GeometricModelConfig>) {
          GeometricExample ex = geometric_example(mc.rho, mc.A);
          DriftCertificate cert = ex.cert;
          if (mc.lambda) cert = cert.with_lambda(*mc.lambda);
          if (mc.b) cert = cert.with_b(*mc.b);
          const double mean = geometric_target_mean(mc.rho);
          // |i - mean| <= max(1, mean) (i + 1) and log V(i) = (i + 1) log A.
          const double kappa = cfg.bound.kappa.value_or(std::max(1.0, mean) / std::log(mc.A));
          return ModelInstance{std::move(ex), std::move(cert), mean, kappa, cfg.function};
        } else {
          const SymmetricProposal q = mc.proposal == "laplace" ? SymmetricProposal::laplace(mc.proposal_scale)
                                                               : SymmetricProposal::gaussian(mc.proposal_scale);
          const SymmetricTarget target = mc.target == "gaussian" ? SymmetricTarget::gaussian(mc.target_param)
                                                                 : SymmetricTarget::laplace(mc.target_param);
          LogConcaveExample ex = logconcave_example(q, target, mc.xstar);
          DriftCertificate cert = ex.cert;
          if (mc.lambda) cert = cert.with_lambda(*mc.lambda);
          if (mc.b) cert = cert.with_b(*mc.b);
          double mean = 0.0;
          if (cfg.function == "abs") {
            mean = mc.target == "gaussian" ? mc.target_param * std::sqrt(2.0 / std::numbers::pi)
                                           : 1.0 / mc.target_param;
          }
          // log V(x) = |x| + 1.
          const double kappa = cfg.bound.kappa.value_or(std::max(1.0, mean));
          return ModelInstance{std::move(ex), std::move(cert), mean, kappa, cfg.function};
        }
      },
      cfg.model);
}

DriftBoundInputs drift_inputs(const ModelInstance& model, const ExperimentConfig& cfg, std::size_t n) {
  DriftBoundInputs in;
  in.cert = &model.cert;
  in.delta = model.delta();
  in.pi_C = model.pi_C();
  in.kappa = model.kappa;
  in.s = cfg.bound.s;
  in.V_x = model.cert.V(cfg.start);
  in.x_in_C = model.in_small_set(cfg.start);
  in.eta = cfg.bound.eta;
  in.n = n;
  return in;
}

std::vector<double> replica_deviations(const ModelInstance& model, double start, std::size_t n,
                                       std::size_t replicas, std::uint64_t seed, std::size_t threads) {
  std::vector<double> out(replicas);
  parallel_for(replicas, threads, [&](std::size_t i) {
    RandomStream rng = RandomStream::derive(seed, replica_index(n, i));
    CompensatedSum acc;
    std::visit(
        [&](const auto& ex) {
          using T = std::decay_t<decltype(ex)>;
          if constexpr (std::is_same_v<T, GeometricExample>) {
            std::int64_t x = static_cast<std::int64_t>(std::llround(start));
            for (std::size_t k = 0; k < n; ++k) {
              acc.add(model.g(static_cast<double>(x)) - model.mean);
              x = ex.chain.step(x, rng);
            }
          } else {
            double x = start;
            for (std::size_t k = 0; k < n; ++k) {
              acc.add(model.g(x) - model.mean);
              x = ex.chain.step(x, rng);
            }
          }
        },
        model.example);
    out[i] = std::abs(acc.value());
  });
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Certification {
  json doc;
  Status status = Status::Pass;
};

Certification certify(const ModelInstance& model, const ExperimentConfig& cfg) {
  Certification out;
  DriftReport drift;
  MinorizationReport minor;
  json model_json;
  std::visit(
      [&](const auto& ex) {
        using T = std::decay_t<decltype(ex)>;
        model_json = to_json(ex);
        if constexpr (std::is_same_v<T, GeometricExample>) {
          const auto grid = lattice_grid(0, 500);
          drift = verify_drift(ex.chain, model.cert, grid);
          std::vector<std::vector<std::int64_t>> sets;
          for (std::int64_t y = 0; y <= 20; ++y) sets.push_back({y});
          sets.push_back(lattice_grid(0, 20));
          minor = verify_minorization(ex.chain, lattice_grid(0, 0), sets);
        } else {
          const double span = ex.xstar + 12.0;
          const auto grid = linear_grid(-span, span, 241);
          drift = verify_drift(ex.chain, model.cert, grid);
          std::vector<Interval> sets;
          const auto edges = linear_grid(-ex.xstar, ex.xstar, 21);
          for (std::size_t k = 0; k + 1 < edges.size(); ++k) sets.push_back({edges[k], edges[k + 1]});
          sets.push_back({-ex.xstar, ex.xstar});
          minor = verify_minorization(ex.chain, linear_grid(-ex.xstar, ex.xstar, 41), sets);
        }
      },
      model.example);
  model_json["lambda_used"] = model.cert.lambda();
  model_json["b_used"] = model.cert.b();
  out.status = drift.status == Status::Pass && minor.status == Status::Pass ? Status::Pass : Status::Fail;
  out.doc = {{"model", model_json},
             {"function", model.function},
             {"function_mean", model.mean},
             {"kappa", model.kappa},
             {"start", cfg.start},
             {"drift_check", drift_json(drift)},
             {"minorization_check", minorization_json(minor)},
             {"status", to_string(out.status)}};
  if (out.status == Status::Pass) {
    const DriftBoundInputs in = drift_inputs(model, cfg, cfg.n.empty() ? 1 : cfg.n.front());
    out.doc["norms"] = to_json(certify_geometric(model.cert, in.delta, in.kappa, in.s, in.V_x, in.pi_C, in.x_in_C));
  }
  return out;
}

}  // namespace

RunOutcome run_certify(const ExperimentConfig& cfg) {
  const ModelInstance model = build_model(cfg);
  fs::create_directories(cfg.output_dir);
  Certification c = certify(model, cfg);
  c.doc["seed"] = cfg.seed;
  write_json(cfg.output_dir / "certificate.json", c.doc);
  return {c.status, c.doc};
}

RunOutcome run_simulate(const ExperimentConfig& cfg) {
  const ModelInstance model = build_model(cfg);
  fs::create_directories(cfg.output_dir);
  json per_n = json::array();
  for (std::size_t n : cfg.n) {
    std::vector<RegenerationLedger> ledgers(cfg.replicas);
    std::vector<RegenerationLedger> unit(cfg.replicas);
    auto f = [&model](double x) { return model.g(x) - model.mean; };
    parallel_for(cfg.replicas, cfg.threads, [&](std::size_t i) {
      RandomStream rng = RandomStream::derive(cfg.seed, replica_index(n, i));
      std::visit(
          [&](const auto& ex) {
            using T = std::decay_t<decltype(ex)>;
            if constexpr (std::is_same_v<T, GeometricExample>) {
              const auto traj =
                  simulate_regenerative(ex.chain, n, static_cast<std::int64_t>(std::llround(cfg.start)), rng);
              ledgers[i] = extract_ledger(traj, [&](std::int64_t x) { return f(static_cast<double>(x)); }, n);
              unit[i] = extract_ledger(traj, [](std::int64_t) { return 1.0; }, n);
            } else {
              const auto traj = simulate_regenerative(ex.chain, n, cfg.start, rng);
              ledgers[i] = extract_ledger(traj, f, n);
              unit[i] = extract_ledger(traj, [](double) { return 1.0; }, n);
            }
          },
          model.example);
    });
    const std::string tag = "n" + std::to_string(n);
    write_ledger(ledgers.front(), cfg.seed, cfg.output_dir / ("ledger_" + tag + ".csv"),
                 cfg.output_dir / ("ledger_" + tag + ".json"));
    std::size_t blocks = 0;
    double len_sum = 0.0;
    for (const auto& L : unit) {
      blocks += L.blocks.size();
      for (double s : L.blocks) len_sum += s;
    }
    json entry = {{"n", n},
                  {"replicas", cfg.replicas},
                  {"blocks", blocks},
                  {"mean_block_length", blocks ? len_sum / static_cast<double>(blocks) : 0.0},
                  {"expected_block_length", 1.0 / (model.delta() * model.pi_C())}};
    if (blocks >= 1000) {
      entry["variance_regen"] = to_json(estimate_sigma2_regen(ledgers));
      entry["dependence"] = {{"lag_correlation", block_dependence_report(ledgers, cfg.seed).lag_correlation}};
    }
    per_n.push_back(entry);
  }
  json doc = {{"command", "simulate"}, {"seed", cfg.seed}, {"runs", per_n}};
  write_json(cfg.output_dir / "simulate.json", doc);
  return {Status::Pass, doc};
}

RunOutcome run_verify(const ExperimentConfig& cfg) {
  if (cfg.replicas < 1000)
    throw InsufficientData("verify needs at least 1000 replicas for an empirical tail, got " +
                           std::to_string(cfg.replicas));
  const ModelInstance model = build_model(cfg);
  fs::create_directories(cfg.output_dir);
  Certification cert = certify(model, cfg);
  cert.doc["seed"] = cfg.seed;
  write_json(cfg.output_dir / "certificate.json", cert.doc);
  if (cert.status == Status::Fail) {
    json doc = {{"status", "FAIL"}, {"reason", "certificate verification failed"}};
    write_json(cfg.output_dir / "verdict.json", doc);
    return {Status::Fail, doc};
  }

  std::ostringstream tails;
  std::ostringstream bounds;
  json per_n = json::array();
  Status overall = Status::Pass;
  bool header_written = false;
  for (std::size_t n : cfg.n) {
    const DriftBoundInputs in = drift_inputs(model, cfg, n);
    const DriftBoundResult res = drift_bound(in);
    const std::vector<double> grid = cfg.t_grid.grid_for(n);
    const std::vector<double> dev = replica_deviations(model, cfg.start, n, cfg.replicas, cfg.seed, cfg.threads);
    const EmpiricalTail tail = empirical_tail(dev, grid);
    const Verdict v = domination_verdict(tail, res.curve);
    if (v.status == Status::Fail) overall = Status::Fail;

    if (!header_written) {
      tails << "n,t,empirical,stderr,bound_total";
      bounds << "n,t,bound_total";
      for (std::size_t k = 0; k < res.curve.size(); ++k) {
        tails << "," << res.curve.label(k);
        bounds << "," << res.curve.label(k);
      }
      tails << "\n";
      bounds << "\n";
      header_written = true;
    }
    double first_informative = -1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double t = grid[i];
      const double total = res.curve.evaluate(t);
      if (first_informative < 0.0 && total < 1.0) first_informative = t;
      const auto parts = res.curve.breakdown(t);
      tails << n << "," << num(t) << "," << num(tail.prob[i]) << "," << num(tail.std_error[i]) << "," << num(total);
      bounds << n << "," << num(t) << "," << num(total);
      for (double p : parts) {
        tails << "," << num(p);
        bounds << "," << num(p);
      }
      tails << "\n";
      bounds << "\n";
    }
    json entry = to_json(v);
    entry["n"] = n;
    entry["curve"] = curve_params_json(res);
    entry["first_informative_t"] = first_informative < 0.0 ? json(nullptr) : json(first_informative);
    per_n.push_back(entry);
  }
  write_text(cfg.output_dir / "tails.csv", tails.str());
  write_text(cfg.output_dir / "bounds.csv", bounds.str());
  json doc = {{"command", "verify"},
              {"seed", cfg.seed},
              {"replicas", cfg.replicas},
              {"status", to_string(overall)},
              {"runs", per_n}};
  write_json(cfg.output_dir / "verdict.json", doc);
  return {overall, doc};
}

RunOutcome run_scan(const ExperimentConfig& cfg) {
  const auto& mc = std::get<LogConcaveModelConfig>(cfg.model);
  const SymmetricProposal q = mc.proposal == "laplace" ? SymmetricProposal::laplace(mc.proposal_scale)
                                                       : SymmetricProposal::gaussian(mc.proposal_scale);
  const SymmetricTarget target = mc.target == "gaussian" ? SymmetricTarget::gaussian(mc.target_param)
                                                         : SymmetricTarget::laplace(mc.target_param);
  ScanSettings settings;
  settings.kappa = cfg.bound.kappa.value_or(1.0);
  settings.s = cfg.bound.s;
  settings.start = cfg.start;
  settings.eta = cfg.bound.eta;
  settings.n = cfg.scan.n;
  settings.t = cfg.scan.t;
  const ScanResult res = scan_xstar(q, target, cfg.scan.xstar_grid, settings);
  fs::create_directories(cfg.output_dir);
  std::ostringstream csv;
  csv << "xstar,feasible,lambda,b,delta,bound,raw_bound\n";
  json rows = json::array();
  for (const auto& r : res.table) {
    csv << num(r.xstar) << "," << (r.feasible ? 1 : 0) << "," << num(r.lambda) << "," << num(r.b) << ","
        << num(r.delta) << "," << num(r.bound) << "," << num(r.raw_bound) << "\n";
    rows.push_back({{"xstar", r.xstar}, {"feasible", r.feasible}, {"lambda", r.lambda}, {"b", r.b},
                    {"delta", r.delta}, {"bound", r.bound}, {"raw_bound", r.feasible ? json(r.raw_bound) : json(nullptr)}});
  }
  write_text(cfg.output_dir / "scan.csv", csv.str());
  json doc = {{"command", "scan"}, {"best_xstar", res.best_xstar}, {"n", settings.n}, {"t", settings.t}, {"table", rows}};
  write_json(cfg.output_dir / "scan.json", doc);
  return {Status::Pass, doc};
}

RunOutcome run_report(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "source,n,t,empirical,stderr,bound\n";
  std::size_t rows = 0;
  for (const auto& dir : cfg.inputs) {
    const fs::path tails = dir / "tails.csv";
    std::ifstream in(tails);
    if (!in) throw MissingInputs("no tails.csv in " + dir.string() + "; run verify first");
    std::string line;
    if (!std::getline(in, line)) throw MissingInputs(tails.string() + " is empty");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cells = split_csv_line(line);
      if (cells.size() < 5) throw MissingInputs(tails.string() + " has a malformed row");
      out << dir.filename().string() << "," << cells[0] << "," << cells[1] << "," << cells[2] << "," << cells[3]
          << "," << cells[4] << "\n";
      ++rows;
    }
  }
  fs::create_directories(cfg.output_dir);
  write_text(cfg.output_dir / "report.csv", out.str());
  json doc = {{"command", "report"}, {"rows", rows}, {"inputs", cfg.inputs.size()}};
  return {Status::Pass, doc};
}

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.command) {
    case Command::Certify: return run_certify(cfg);
    case Command::Simulate: return run_simulate(cfg);
    case Command::Verify: return run_verify(cfg);
    case Command::Scan: return run_scan(cfg);
    case Command::Report: return run_report(cfg);
  }
  throw ConfigError("unknown command");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidA*>(&e) ||
      dynamic_cast<const NegativeLambda*>(&e) || dynamic_cast<const MissingInputs*>(&e) ||
      dynamic_cast<const AllInfeasible*>(&e))
    return 1;
  if (dynamic_cast<const InsufficientData*>(&e) || dynamic_cast<const InsufficientBlocks*>(&e)) return 2;
  return 3;
}

}  // namespace mcconc
