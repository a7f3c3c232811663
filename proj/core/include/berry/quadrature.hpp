#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "berry/error.hpp"

namespace berry::quad {

// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Cached, thread-safe. References stay valid for the life of the process.
const GaussRule& gauss_legendre(int n);

// Nodes and weights of an n-point rule mapped onto [a, b].
void map_rule(const GaussRule& rule, double a, double b, std::vector<double>& x,
              std::vector<double>& w);

template <class F>
double integrate_gl(F&& f, double a, double b, int n) {
  const GaussRule& r = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += r.weights[i] * f(mid + half * r.nodes[i]);
  return half * sum;
}

template <class F>
double integrate_panels(F&& f, double a, double b, int panels, int order = 8) {
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) sum += integrate_gl(f, a + p * h, a + (p + 1) * h, order);
  return sum;
}

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

// Composite Gauss-Legendre with panel doubling until two successive
// estimates differ by less than max(abs_tol, rel_tol * |estimate|). Throws
// AccuracyError when max_doublings is exhausted.
template <class F>
AdaptiveResult integrate_adaptive(F&& f, double a, double b, int panels0, double abs_tol,
                                  int max_doublings = 6, int order = 8, double rel_tol = 0.0) {
  if (a == b) return {0.0, 0.0, 0};
  int panels = std::max(1, panels0);
  double prev = integrate_panels(f, a, b, panels, order);
  for (int d = 0; d < max_doublings; ++d) {
    panels *= 2;
    const double cur = integrate_panels(f, a, b, panels, order);
    const double err = std::fabs(cur - prev);
    if (err < std::max(abs_tol, rel_tol * std::fabs(cur))) return {cur, err, panels};
    prev = cur;
  }
  const double last = integrate_panels(f, a, b, panels * 2, order);
  throw AccuracyError("integrate_adaptive: no convergence", std::fabs(last - prev));
}

}  // namespace berry::quad
