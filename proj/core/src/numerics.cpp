#include "mcconc/numerics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

#include "mcconc/errors.hpp"

namespace mcconc {

double log_floor_e(double x) { return std::log(std::max(x, kE)); }

double gamma_fn(double x) { return std::tgamma(x); }

double integrate(const RealFn& f, double a, double b, const QuadratureOptions& opt) {
  if (a == b) return 0.0;
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, opt.max_depth, opt.rel_tol, &error, &l1);
  if (!std::isfinite(value) || error > std::max(opt.abs_tol, opt.rel_tol * l1)) {
    std::ostringstream os;
    os << "quadrature on [" << a << ", " << b << "] did not converge (error estimate " << error << ")";
    throw QuadratureFailure(os.str());
  }
  return value;
}

double integrate_upper_tail(const RealFn& f, double a, const QuadratureOptions& opt) {
  double peak = 0.0;
  for (int k = 0; k <= 16; ++k) peak = std::max(peak, std::abs(f(a + 0.125 * k)));
  // Segment ends a+1, a+2, a+4, ... until the integrand is negligible.
  std::vector<double> ends;
  double width = 1.0;
  for (;;) {
    const double x = a + width;
    const double fx = std::abs(f(x));
    peak = std::max(peak, fx);
    ends.push_back(x);
    if (fx <= opt.tail_cutoff * peak) break;
    if (width > 1e5) throw QuadratureFailure("integrand does not decay on the upper tail");
    width *= 2.0;
  }
  if (peak == 0.0) return 0.0;
  CompensatedSum total;
  double lo = a;
  for (double hi : ends) {
    total.add(integrate(f, lo, hi, opt));
    lo = hi;
  }
  return total.value();
}

double integrate_pieces(const RealFn& f, double a, double b, std::vector<double> breakpoints,
                        const QuadratureOptions& opt) {
  std::vector<double> cuts{a};
  std::sort(breakpoints.begin(), breakpoints.end());
  for (double x : breakpoints)
    if (x > a && x < b && x > cuts.back()) cuts.push_back(x);
  cuts.push_back(b);
  CompensatedSum total;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total.add(integrate(f, cuts[i], cuts[i + 1], opt));
  return total.value();
}

double integrate_line(const RealFn& f, std::vector<double> breakpoints, const QuadratureOptions& opt) {
  if (breakpoints.empty()) breakpoints.push_back(0.0);
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  const double lo = breakpoints.front();
  const double hi = breakpoints.back();
  CompensatedSum total;
  total.add(integrate_upper_tail(f, hi, opt));
  total.add(integrate_upper_tail([&f](double y) { return f(-y); }, -lo, opt));
  total.add(integrate_pieces(f, lo, hi, breakpoints, opt));
  return total.value();
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    comp_ += (sum_ - t) + x;
  else
    comp_ += (x - t) + sum_;
  sum_ = t;
}

}  // namespace mcconc
