#pragma once

// Test-side numerical integration. Kept out of the library on purpose: these
// routines are the independent oracle that closed-form results are checked
// against, so they must not share code with the implementation under test.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace testsupport {

inline double simpson_rule(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double b, double fa, double fm, double fb,
                                   double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_rule(a, m, fa, flm, fm);
  const double right = simpson_rule(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

/// Adaptive Simpson quadrature of f over [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-11, int depth = 40) {
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, simpson_rule(a, b, fa, fm, fb), tol,
                              depth);
}

/// Piecewise adaptive Simpson over consecutive knot intervals. Sharply peaked
/// integrands need knots that straddle the peak, otherwise the first Simpson
/// estimate sees only zeros and the recursion stops immediately.
inline double integrate_panels(const std::function<double(double)>& f,
                               const std::vector<double>& knots, double tol) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    sum += integrate(f, knots[i], knots[i + 1], tol);
  }
  return sum;
}

}  // namespace testsupport
