#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mcconc/random.hpp"

namespace mcconc {

enum class StateSpace { IntegerLattice, RealLine };

enum class Status { Pass, Fail };
const char* to_string(Status s);

// ---------------------------------------------------------------------------
// Integer lattice kernels

struct Transition {
  std::int64_t to;
  double prob;
};
using Row = std::vector<Transition>;

// Sorts by target state and merges duplicate targets.
Row canonical_row(Row row);
double row_probability(const Row& row, std::int64_t y);
double row_total(const Row& row);

class LatticeKernel {
 public:
  virtual ~LatticeKernel() = default;
  // Exact one-step law P(x, .), finite support.
  virtual Row row(std::int64_t x) const = 0;
  virtual std::int64_t sample(std::int64_t x, RandomStream& rng) const;
  virtual std::string name() const = 0;
};

// Metropolis kernel on {0, 1, 2, ...} with nearest-neighbour proposal
// q(0,0) = q(0,1) = 1/2, q(i,i+1) = q(i,i-1) = 1/2 and geometric target
// pi(i) = (1 - rho) rho^i.
class GeometricMetropolisKernel final : public LatticeKernel {
 public:
  explicit GeometricMetropolisKernel(double rho);

  double rho() const { return rho_; }
  double target(std::int64_t x) const;
  double target_ratio(std::int64_t x, std::int64_t y) const;  // pi(y) / pi(x)
  double proposal(std::int64_t x, std::int64_t y) const;
  double acceptance(std::int64_t x, std::int64_t y) const;
  std::int64_t propose(std::int64_t x, RandomStream& rng) const;
  // Accept/reject the proposed move with acceptance uniform u.
  std::int64_t transition(std::int64_t x, std::int64_t proposed, double u) const;

  Row row(std::int64_t x) const override;
  std::int64_t sample(std::int64_t x, RandomStream& rng) const override;
  std::string name() const override { return "geometric_metropolis"; }

 private:
  double rho_;
};

// User-supplied row-stochastic matrix on {0, ..., K-1}.
class MatrixKernel final : public LatticeKernel {
 public:
  explicit MatrixKernel(std::vector<std::vector<double>> p);

  std::size_t size() const { return p_.size(); }
  Row row(std::int64_t x) const override;
  std::int64_t sample(std::int64_t x, RandomStream& rng) const override;
  std::string name() const override { return "matrix"; }

 private:
  std::vector<std::vector<double>> p_;
  std::vector<std::vector<double>> cdf_;
};

struct LatticeSmallSet {
  std::vector<std::int64_t> members;
  double delta = 1.0;
  Row nu;
  int m = 1;

  bool contains(std::int64_t x) const;
};

class LatticeChain {
 public:
  using state_type = std::int64_t;

  LatticeChain(std::shared_ptr<const LatticeKernel> kernel, LatticeSmallSet small_set);

  const LatticeKernel& kernel() const { return *kernel_; }
  const LatticeSmallSet& small_set() const { return small_set_; }
  int m() const { return small_set_.m; }
  double delta() const { return small_set_.delta; }
  bool in_small_set(std::int64_t x) const { return small_set_.contains(x); }

  std::int64_t step(std::int64_t x, RandomStream& rng) const { return kernel_->sample(x, rng); }
  Row row(std::int64_t x) const { return kernel_->row(x); }
  Row power_row(std::int64_t x, int k) const;

  // delta * nu(y) / P^m(x, y) for x in C: the probability that a skeleton
  // move x -> y is a regeneration.
  double regeneration_probability(std::int64_t x, std::int64_t y) const;

 private:
  std::shared_ptr<const LatticeKernel> kernel_;
  LatticeSmallSet small_set_;
  std::map<std::int64_t, Row> skeleton_rows_;  // P^m(c, .) for c in C
};

// ---------------------------------------------------------------------------
// Real line Metropolis kernels

enum class ProposalKind { Laplace, Gaussian };

// Symmetric increment density q(z) = q(-z).
class SymmetricProposal {
 public:
  static SymmetricProposal laplace(double scale = 1.0);
  static SymmetricProposal gaussian(double scale = 1.0);

  ProposalKind kind() const { return kind_; }
  double scale() const { return scale_; }
  double density(double z) const;
  double sample(RandomStream& rng) const;
  std::vector<double> kinks() const;
  std::string name() const;

 private:
  SymmetricProposal(ProposalKind kind, double scale);
  ProposalKind kind_;
  double scale_;
};

enum class TargetKind { Gaussian, Laplace };

// Symmetric unimodal target density, normalized.
class SymmetricTarget {
 public:
  static SymmetricTarget gaussian(double sd = 1.0);
  static SymmetricTarget laplace(double rate = 2.0);

  TargetKind kind() const { return kind_; }
  double param() const { return param_; }
  double log_density(double x) const;
  double density(double x) const;
  double mass(double lo, double hi) const;
  double sup_on(double lo, double hi) const;
  // Point beyond which log pi(x) - log pi(y) >= 2 (y - x) for all y > x.
  double tail_threshold() const;
  std::vector<double> kinks() const;
  std::string name() const;

 private:
  SymmetricTarget(TargetKind kind, double param);
  TargetKind kind_;
  double param_;
};

class MetropolisRealKernel {
 public:
  MetropolisRealKernel(SymmetricProposal proposal, SymmetricTarget target);

  const SymmetricProposal& proposal() const { return proposal_; }
  const SymmetricTarget& target() const { return target_; }

  double acceptance(double x, double y) const;
  double transition(double x, double proposed, double u) const;
  double sample(double x, RandomStream& rng) const;

  // Density of the accepted-move part of P(x, .).
  double move_density(double x, double y) const;
  // Probability of staying put.
  double rejection_mass(double x) const;
  // Integral of h against P(x, .).
  double expect(double x, const std::function<double(double)>& h) const;
  double probability(double x, double lo, double hi) const;

 private:
  std::vector<double> breakpoints(double x) const;
  SymmetricProposal proposal_;
  SymmetricTarget target_;
};

struct IntervalSmallSet {
  double lo = 0.0;
  double hi = 0.0;
  double delta = 0.0;
  int m = 1;

  bool contains(double x) const { return x >= lo && x <= hi; }
};

// nu = pi( . | C).
class RealLineChain {
 public:
  using state_type = double;

  RealLineChain(MetropolisRealKernel kernel, IntervalSmallSet small_set);

  const MetropolisRealKernel& kernel() const { return kernel_; }
  const IntervalSmallSet& small_set() const { return small_set_; }
  int m() const { return 1; }
  double delta() const { return small_set_.delta; }
  double pi_C() const { return pi_C_; }
  bool in_small_set(double x) const { return small_set_.contains(x); }

  double step(double x, RandomStream& rng) const { return kernel_.sample(x, rng); }
  double nu_mass(double lo, double hi) const;
  double regeneration_probability(double x, double y) const;

 private:
  MetropolisRealKernel kernel_;
  IntervalSmallSet small_set_;
  double pi_C_;
};

using ChainModel = std::variant<LatticeChain, RealLineChain>;
StateSpace state_space(const ChainModel& model);

// ---------------------------------------------------------------------------
// Drift certificates

enum class DriftKind { GeometricPV, RegularExpH };

class DriftCertificate {
 public:
  using Fn = std::function<double(double)>;

  // (PV)(x) - V(x) <= -lambda V(x) + b 1_C(x), K = sup_C V.
  static DriftCertificate geometric(Fn V, double lambda, double b, double K);
  // (P^m V)(x) - V(x) <= -exp(h(x)) + b 1_C(x).
  static DriftCertificate regular(Fn V, Fn h, double beta, double b, double K);

  double V(double x) const { return V_(x); }
  double h(double x) const { return h_ ? h_(x) : 0.0; }
  double lambda() const { return lambda_; }
  double b() const { return b_; }
  double K() const { return K_; }
  double beta() const { return beta_; }
  DriftKind kind() const { return kind_; }

  DriftCertificate with_lambda(double lambda) const;
  DriftCertificate with_b(double b) const;

 private:
  DriftCertificate() = default;
  Fn V_;
  Fn h_;
  double lambda_ = 0.0;
  double b_ = 0.0;
  double K_ = 1.0;
  double beta_ = 1.0;
  DriftKind kind_ = DriftKind::GeometricPV;
};

struct DriftReport {
  Status status = Status::Pass;
  bool exact = true;
  double tolerance = 0.0;
  // Violation of the drift inequality divided by max(1, V(x)).
  double max_violation = 0.0;
  double worst_state = 0.0;
  bool V_at_least_one = true;
  bool K_dominates = true;
  std::vector<double> states;
  std::vector<double> violations;
};

struct MinorizationReport {
  Status status = Status::Pass;
  double min_slack = 0.0;
  double worst_state = 0.0;
  std::size_t worst_set = 0;
};

struct Interval {
  double lo;
  double hi;
};

DriftReport verify_drift(const LatticeChain& model, const DriftCertificate& cert,
                         std::span<const std::int64_t> grid);
DriftReport verify_drift(const RealLineChain& model, const DriftCertificate& cert, std::span<const double> grid);

MinorizationReport verify_minorization(const LatticeChain& model, std::span<const std::int64_t> grid,
                                       const std::vector<std::vector<std::int64_t>>& sets);
MinorizationReport verify_minorization(const RealLineChain& model, std::span<const double> grid,
                                       const std::vector<Interval>& sets);

std::vector<std::int64_t> lattice_grid(std::int64_t lo, std::int64_t hi);
std::vector<double> linear_grid(double lo, double hi, std::size_t count);

}  // namespace mcconc
