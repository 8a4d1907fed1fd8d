#include "mcconc/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mcconc/errors.hpp"
#include "mcconc/numerics.hpp"

namespace mcconc {

const char* to_string(Status s) { return s == Status::Pass ? "PASS" : "FAIL"; }

Row canonical_row(Row row) {
  std::sort(row.begin(), row.end(), [](const Transition& a, const Transition& b) { return a.to < b.to; });
  Row out;
  for (const auto& t : row) {
    if (!out.empty() && out.back().to == t.to)
      out.back().prob += t.prob;
    else
      out.push_back(t);
  }
  return out;
}

double row_probability(const Row& row, std::int64_t y) {
  auto it = std::lower_bound(row.begin(), row.end(), y,
                             [](const Transition& t, std::int64_t v) { return t.to < v; });
  return (it != row.end() && it->to == y) ? it->prob : 0.0;
}

double row_total(const Row& row) {
  CompensatedSum s;
  for (const auto& t : row) s.add(t.prob);
  return s.value();
}

std::int64_t LatticeKernel::sample(std::int64_t x, RandomStream& rng) const {
  const Row r = row(x);
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& t : r) {
    acc += t.prob;
    if (u < acc) return t.to;
  }
  return r.back().to;
}

// --- GeometricMetropolisKernel ----------------------------------------------

GeometricMetropolisKernel::GeometricMetropolisKernel(double rho) : rho_(rho) {
  require(rho > 0.0 && rho < 1.0, "geometric target needs rho in (0,1)");
}

double GeometricMetropolisKernel::target(std::int64_t x) const {
  return x < 0 ? 0.0 : (1.0 - rho_) * std::pow(rho_, static_cast<double>(x));
}

double GeometricMetropolisKernel::target_ratio(std::int64_t x, std::int64_t y) const {
  return std::pow(rho_, static_cast<double>(y - x));
}

double GeometricMetropolisKernel::proposal(std::int64_t x, std::int64_t y) const {
  if (x < 0 || y < 0) return 0.0;
  if (x == 0) return (y == 0 || y == 1) ? 0.5 : 0.0;
  return (y == x + 1 || y == x - 1) ? 0.5 : 0.0;
}

double GeometricMetropolisKernel::acceptance(std::int64_t x, std::int64_t y) const {
  if (x == y) return 1.0;
  const double q_xy = proposal(x, y);
  if (q_xy == 0.0) return 0.0;
  return std::min(1.0, target_ratio(x, y) * proposal(y, x) / q_xy);
}

std::int64_t GeometricMetropolisKernel::propose(std::int64_t x, RandomStream& rng) const {
  const bool up = rng.uniform() < 0.5;
  if (up) return x + 1;
  return x == 0 ? 0 : x - 1;
}

std::int64_t GeometricMetropolisKernel::transition(std::int64_t x, std::int64_t proposed, double u) const {
  return u < acceptance(x, proposed) ? proposed : x;
}

Row GeometricMetropolisKernel::row(std::int64_t x) const {
  require(x >= 0, "geometric chain lives on the nonnegative integers");
  if (x == 0) return {{0, 1.0 - 0.5 * rho_}, {1, 0.5 * rho_}};
  return {{x - 1, 0.5}, {x, 0.5 * (1.0 - rho_)}, {x + 1, 0.5 * rho_}};
}

std::int64_t GeometricMetropolisKernel::sample(std::int64_t x, RandomStream& rng) const {
  const std::int64_t y = propose(x, rng);
  return transition(x, y, rng.uniform());
}

// --- MatrixKernel -------------------------------------------------------------

MatrixKernel::MatrixKernel(std::vector<std::vector<double>> p) : p_(std::move(p)) {
  require(!p_.empty(), "transition matrix is empty");
  for (const auto& r : p_) {
    require(r.size() == p_.size(), "transition matrix must be square");
    CompensatedSum s;
    std::vector<double> cdf;
    for (double v : r) {
      require(v >= 0.0, "transition probabilities must be nonnegative");
      s.add(v);
      cdf.push_back(s.value());
    }
    require(std::abs(s.value() - 1.0) <= 1e-12, "transition matrix rows must sum to 1");
    cdf_.push_back(std::move(cdf));
  }
}

Row MatrixKernel::row(std::int64_t x) const {
  require(x >= 0 && static_cast<std::size_t>(x) < p_.size(), "state outside the matrix kernel");
  Row out;
  const auto& r = p_[static_cast<std::size_t>(x)];
  for (std::size_t j = 0; j < r.size(); ++j)
    if (r[j] > 0.0) out.push_back({static_cast<std::int64_t>(j), r[j]});
  return out;
}

std::int64_t MatrixKernel::sample(std::int64_t x, RandomStream& rng) const {
  require(x >= 0 && static_cast<std::size_t>(x) < p_.size(), "state outside the matrix kernel");
  const auto& cdf = cdf_[static_cast<std::size_t>(x)];
  const double u = rng.uniform() * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<std::int64_t>(it - cdf.begin());
}

// --- LatticeChain -------------------------------------------------------------

bool LatticeSmallSet::contains(std::int64_t x) const {
  return std::binary_search(members.begin(), members.end(), x);
}

LatticeChain::LatticeChain(std::shared_ptr<const LatticeKernel> kernel, LatticeSmallSet small_set)
    : kernel_(std::move(kernel)), small_set_(std::move(small_set)) {
  require(kernel_ != nullptr, "lattice chain needs a kernel");
  require(small_set_.delta > 0.0 && small_set_.delta <= 1.0, "delta must lie in (0,1]");
  require(small_set_.m >= 1, "skeleton step m must be positive");
  require(!small_set_.members.empty(), "small set is empty");
  std::sort(small_set_.members.begin(), small_set_.members.end());
  small_set_.members.erase(std::unique(small_set_.members.begin(), small_set_.members.end()),
                           small_set_.members.end());
  small_set_.nu = canonical_row(small_set_.nu);
  for (const auto& t : small_set_.nu) require(t.prob >= 0.0, "nu must be nonnegative");
  require(std::abs(row_total(small_set_.nu) - 1.0) <= 1e-12, "nu must be a probability measure");
  for (std::int64_t c : small_set_.members) skeleton_rows_[c] = power_row(c, small_set_.m);
}

Row LatticeChain::power_row(std::int64_t x, int k) const {
  Row dist{{x, 1.0}};
  for (int step = 0; step < k; ++step) {
    std::map<std::int64_t, CompensatedSum> next;
    for (const auto& from : dist)
      for (const auto& t : kernel_->row(from.to)) next[t.to].add(from.prob * t.prob);
    dist.clear();
    for (const auto& [y, s] : next) dist.push_back({y, s.value()});
  }
  return dist;
}

double LatticeChain::regeneration_probability(std::int64_t x, std::int64_t y) const {
  auto it = skeleton_rows_.find(x);
  if (it == skeleton_rows_.end()) return 0.0;
  const double nu_y = row_probability(small_set_.nu, y);
  if (nu_y == 0.0) return 0.0;
  const double p = row_probability(it->second, y);
  if (p == 0.0) {
    std::ostringstream os;
    os << "nu charges state " << y << " which P^m(" << x << ", .) cannot reach";
    throw ResidualKernelNegative(os.str());
  }
  return small_set_.delta * nu_y / p;
}

// --- Real line ------------------------------------------------------------------

SymmetricProposal::SymmetricProposal(ProposalKind kind, double scale) : kind_(kind), scale_(scale) {
  require(scale > 0.0, "proposal scale must be positive");
}

SymmetricProposal SymmetricProposal::laplace(double scale) { return {ProposalKind::Laplace, scale}; }
SymmetricProposal SymmetricProposal::gaussian(double scale) { return {ProposalKind::Gaussian, scale}; }

double SymmetricProposal::density(double z) const {
  if (kind_ == ProposalKind::Laplace) return std::exp(-std::abs(z) / scale_) / (2.0 * scale_);
  const double u = z / scale_;
  return std::exp(-0.5 * u * u) / (scale_ * std::sqrt(2.0 * std::numbers::pi));
}

double SymmetricProposal::sample(RandomStream& rng) const {
  if (kind_ == ProposalKind::Laplace) {
    const double e = rng.exponential();
    return rng.uniform() < 0.5 ? -scale_ * e : scale_ * e;
  }
  return scale_ * rng.normal();
}

std::vector<double> SymmetricProposal::kinks() const {
  return kind_ == ProposalKind::Laplace ? std::vector<double>{0.0} : std::vector<double>{};
}

std::string SymmetricProposal::name() const { return kind_ == ProposalKind::Laplace ? "laplace" : "gaussian"; }

SymmetricTarget::SymmetricTarget(TargetKind kind, double param) : kind_(kind), param_(param) {
  require(param > 0.0, "target parameter must be positive");
  // Tails must decay at least like exp(-2|x|).
  if (kind == TargetKind::Laplace) require(param >= 2.0, "Laplace target needs rate >= 2");
}

SymmetricTarget SymmetricTarget::gaussian(double sd) { return {TargetKind::Gaussian, sd}; }
SymmetricTarget SymmetricTarget::laplace(double rate) { return {TargetKind::Laplace, rate}; }

double SymmetricTarget::log_density(double x) const {
  if (kind_ == TargetKind::Gaussian) {
    const double u = x / param_;
    return -0.5 * u * u - std::log(param_ * std::sqrt(2.0 * std::numbers::pi));
  }
  return std::log(0.5 * param_) - param_ * std::abs(x);
}

double SymmetricTarget::density(double x) const { return std::exp(log_density(x)); }

double SymmetricTarget::mass(double lo, double hi) const {
  if (hi <= lo) return 0.0;
  if (kind_ == TargetKind::Gaussian) {
    const double s = param_ * std::numbers::sqrt2;
    return 0.5 * (std::erf(hi / s) - std::erf(lo / s));
  }
  auto cdf = [this](double x) {
    return x < 0 ? 0.5 * std::exp(param_ * x) : 1.0 - 0.5 * std::exp(-param_ * x);
  };
  return cdf(hi) - cdf(lo);
}

double SymmetricTarget::sup_on(double lo, double hi) const {
  const double closest = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(std::abs(lo), std::abs(hi));
  return density(closest);
}

double SymmetricTarget::tail_threshold() const {
  return kind_ == TargetKind::Gaussian ? 2.0 * param_ * param_ : 0.0;
}

std::vector<double> SymmetricTarget::kinks() const {
  return kind_ == TargetKind::Laplace ? std::vector<double>{0.0} : std::vector<double>{};
}

std::string SymmetricTarget::name() const { return kind_ == TargetKind::Gaussian ? "gaussian" : "laplace"; }

MetropolisRealKernel::MetropolisRealKernel(SymmetricProposal proposal, SymmetricTarget target)
    : proposal_(proposal), target_(target) {}

double MetropolisRealKernel::acceptance(double x, double y) const {
  const double d = target_.log_density(y) - target_.log_density(x);
  return d >= 0.0 ? 1.0 : std::exp(d);
}

double MetropolisRealKernel::transition(double x, double proposed, double u) const {
  return u < acceptance(x, proposed) ? proposed : x;
}

double MetropolisRealKernel::sample(double x, RandomStream& rng) const {
  const double y = x + proposal_.sample(rng);
  return transition(x, y, rng.uniform());
}

double MetropolisRealKernel::move_density(double x, double y) const {
  return proposal_.density(y - x) * acceptance(x, y);
}

std::vector<double> MetropolisRealKernel::breakpoints(double x) const {
  std::vector<double> pts{x, 0.0, std::abs(x), -std::abs(x)};
  for (double k : proposal_.kinks()) pts.push_back(x + k);
  for (double k : target_.kinks()) pts.push_back(k);
  return pts;
}

double MetropolisRealKernel::rejection_mass(double x) const {
  const double moved = integrate_line([&](double y) { return move_density(x, y); }, breakpoints(x));
  return std::max(0.0, 1.0 - moved);
}

double MetropolisRealKernel::expect(double x, const std::function<double(double)>& h) const {
  const double moved = integrate_line([&](double y) { return h(y) * move_density(x, y); }, breakpoints(x));
  return moved + h(x) * rejection_mass(x);
}

double MetropolisRealKernel::probability(double x, double lo, double hi) const {
  // Geometric cuts away from x keep wide intervals from starving the quadrature.
  std::vector<double> cuts = breakpoints(x);
  for (double w = proposal_.scale(); w < 2.0 * (hi - lo); w *= 2.0) {
    cuts.push_back(x - w);
    cuts.push_back(x + w);
  }
  const double moved = integrate_pieces([&](double y) { return move_density(x, y); }, lo, hi, std::move(cuts));
  return moved + ((x >= lo && x <= hi) ? rejection_mass(x) : 0.0);
}

RealLineChain::RealLineChain(MetropolisRealKernel kernel, IntervalSmallSet small_set)
    : kernel_(std::move(kernel)), small_set_(small_set) {
  require(small_set_.lo < small_set_.hi, "small set interval is empty");
  require(small_set_.delta > 0.0 && small_set_.delta <= 1.0, "delta must lie in (0,1]");
  require(small_set_.m == 1, "real line chains are supported with m = 1 only");
  pi_C_ = kernel_.target().mass(small_set_.lo, small_set_.hi);
  require(pi_C_ > 0.0, "small set has zero target mass");
}

double RealLineChain::nu_mass(double lo, double hi) const {
  return kernel_.target().mass(std::max(lo, small_set_.lo), std::min(hi, small_set_.hi)) / pi_C_;
}

double RealLineChain::regeneration_probability(double x, double y) const {
  if (!small_set_.contains(x) || !small_set_.contains(y) || y == x) return 0.0;
  const double nu_density = kernel_.target().density(y) / pi_C_;
  return small_set_.delta * nu_density / kernel_.move_density(x, y);
}

StateSpace state_space(const ChainModel& model) {
  return std::holds_alternative<LatticeChain>(model) ? StateSpace::IntegerLattice : StateSpace::RealLine;
}

// --- Drift certificates -------------------------------------------------------------

DriftCertificate DriftCertificate::geometric(Fn V, double lambda, double b, double K) {
  require(static_cast<bool>(V), "drift function is missing");
  require(lambda > 0.0 && lambda < 1.0, "drift rate lambda must lie in (0,1)");
  require(b >= 0.0, "drift constant b must be nonnegative");
  require(K >= 1.0, "K = sup_C V must be at least 1");
  DriftCertificate c;
  c.V_ = std::move(V);
  c.lambda_ = lambda;
  c.b_ = b;
  c.K_ = K;
  c.kind_ = DriftKind::GeometricPV;
  return c;
}

DriftCertificate DriftCertificate::regular(Fn V, Fn h, double beta, double b, double K) {
  require(static_cast<bool>(V) && static_cast<bool>(h), "drift functions are missing");
  require(beta > 0.0 && beta <= 1.0, "beta must lie in (0,1]");
  require(b >= 0.0, "drift constant b must be nonnegative");
  DriftCertificate c;
  c.V_ = std::move(V);
  c.h_ = std::move(h);
  c.beta_ = beta;
  c.b_ = b;
  c.K_ = K;
  c.kind_ = DriftKind::RegularExpH;
  return c;
}

DriftCertificate DriftCertificate::with_lambda(double lambda) const {
  require(kind_ == DriftKind::GeometricPV, "lambda only applies to the geometric drift");
  return geometric(V_, lambda, b_, K_);
}

DriftCertificate DriftCertificate::with_b(double b) const {
  DriftCertificate c = *this;
  require(b >= 0.0, "drift constant b must be nonnegative");
  c.b_ = b;
  return c;
}

namespace {

template <class State, class Expect>
DriftReport drift_report(const DriftCertificate& cert, std::span<const State> grid, bool exact,
                         const std::function<bool(State)>& in_C, Expect&& expect_V) {
  require(!grid.empty(), "drift verification grid is empty");
  DriftReport rep;
  rep.exact = exact;
  rep.tolerance = exact ? 1e-10 : 1e-6;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (State x : grid) {
    const double xd = static_cast<double>(x);
    const double vx = cert.V(xd);
    if (!(vx >= 1.0)) rep.V_at_least_one = false;
    const bool c = in_C(x);
    if (c && vx > cert.K() * (1.0 + 1e-12)) rep.K_dominates = false;
    const double pv = expect_V(x);
    const double decrease = cert.kind() == DriftKind::GeometricPV ? cert.lambda() * vx : std::exp(cert.h(xd));
    const double viol = (pv - vx + decrease - (c ? cert.b() : 0.0)) / std::max(1.0, vx);
    rep.states.push_back(xd);
    rep.violations.push_back(viol);
    if (viol > rep.max_violation) {
      rep.max_violation = viol;
      rep.worst_state = xd;
    }
  }
  const bool ok = rep.max_violation <= rep.tolerance && rep.V_at_least_one && rep.K_dominates;
  rep.status = ok ? Status::Pass : Status::Fail;
  return rep;
}

}  // namespace

DriftReport verify_drift(const LatticeChain& model, const DriftCertificate& cert,
                         std::span<const std::int64_t> grid) {
  const int steps = cert.kind() == DriftKind::GeometricPV ? 1 : model.m();
  return drift_report<std::int64_t>(
      cert, grid, true, [&](std::int64_t x) { return model.in_small_set(x); },
      [&](std::int64_t x) {
        CompensatedSum s;
        for (const auto& t : model.power_row(x, steps)) s.add(t.prob * cert.V(static_cast<double>(t.to)));
        return s.value();
      });
}

DriftReport verify_drift(const RealLineChain& model, const DriftCertificate& cert, std::span<const double> grid) {
  return drift_report<double>(
      cert, grid, false, [&](double x) { return model.in_small_set(x); },
      [&](double x) { return model.kernel().expect(x, [&](double y) { return cert.V(y); }); });
}

MinorizationReport verify_minorization(const LatticeChain& model, std::span<const std::int64_t> grid,
                                       const std::vector<std::vector<std::int64_t>>& sets) {
  MinorizationReport rep;
  rep.min_slack = std::numeric_limits<double>::infinity();
  for (std::int64_t x : grid) {
    if (!model.in_small_set(x)) continue;
    const Row pm = model.power_row(x, model.m());
    for (std::size_t k = 0; k < sets.size(); ++k) {
      CompensatedSum p, nu;
      for (std::int64_t y : sets[k]) {
        p.add(row_probability(pm, y));
        nu.add(row_probability(model.small_set().nu, y));
      }
      const double slack = p.value() - model.delta() * nu.value();
      if (slack < rep.min_slack) {
        rep.min_slack = slack;
        rep.worst_state = static_cast<double>(x);
        rep.worst_set = k;
      }
    }
  }
  rep.status = rep.min_slack >= -1e-8 ? Status::Pass : Status::Fail;
  return rep;
}

MinorizationReport verify_minorization(const RealLineChain& model, std::span<const double> grid,
                                       const std::vector<Interval>& sets) {
  MinorizationReport rep;
  rep.min_slack = std::numeric_limits<double>::infinity();
  for (double x : grid) {
    if (!model.in_small_set(x)) continue;
    for (std::size_t k = 0; k < sets.size(); ++k) {
      const double slack = model.kernel().probability(x, sets[k].lo, sets[k].hi) -
                           model.delta() * model.nu_mass(sets[k].lo, sets[k].hi);
      if (slack < rep.min_slack) {
        rep.min_slack = slack;
        rep.worst_state = x;
        rep.worst_set = k;
      }
    }
  }
  rep.status = rep.min_slack >= -1e-8 ? Status::Pass : Status::Fail;
  return rep;
}

std::vector<std::int64_t> lattice_grid(std::int64_t lo, std::int64_t hi) {
  std::vector<std::int64_t> g;
  for (std::int64_t x = lo; x <= hi; ++x) g.push_back(x);
  return g;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
  require(count >= 1, "grid needs at least one point");
  if (count == 1) return {lo};
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return g;
}

}  // namespace mcconc
