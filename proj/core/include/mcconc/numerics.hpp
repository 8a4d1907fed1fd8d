#pragma once

#include <functional>
#include <numbers>
#include <vector>

namespace mcconc {

inline constexpr double kLn2 = std::numbers::ln2;
inline constexpr double kE = std::numbers::e;

// log(max(x, e)); the logarithm convention used by every bound with a log n factor.
double log_floor_e(double x);

// Euler gamma function.
double gamma_fn(double x);

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  unsigned max_depth = 20;
  double tail_cutoff = 1e-16;  // relative to the integrand's peak
};

using RealFn = std::function<double(double)>;

// Adaptive Gauss-Kronrod on [a, b]; throws QuadratureFailure if the error
// estimate exceeds max(abs_tol, rel_tol * L1).
double integrate(const RealFn& f, double a, double b, const QuadratureOptions& opt = {});

// Integral over [a, +inf), truncated once |f| falls below tail_cutoff * peak.
double integrate_upper_tail(const RealFn& f, double a, const QuadratureOptions& opt = {});

// Integral over the whole line, split at the given kink locations.
double integrate_line(const RealFn& f, std::vector<double> breakpoints, const QuadratureOptions& opt = {});

// Integral over [a, b] split at any breakpoints falling inside.
double integrate_pieces(const RealFn& f, double a, double b, std::vector<double> breakpoints,
                        const QuadratureOptions& opt = {});

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace mcconc
