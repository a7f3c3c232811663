#include "berry/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace berry::quad {
namespace {

GaussRule make_rule(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Tricomi initial guess, then Newton on the three-term recurrence.
    const double nn = n;
    double z = (1.0 - (nn - 1.0) / (8.0 * nn * nn * nn)) *
               std::cos(std::numbers::pi * (4.0 * i + 3.0) / (4.0 * nn + 2.0));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = nn * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-15) {
        // One more derivative evaluation at the converged node.
        p1 = 1.0;
        p2 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
        }
        pp = nn * (z * p1 - p2) / (z * z - 1.0);
        break;
      }
    }
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    r.nodes[i] = -z;
    r.nodes[n - 1 - i] = z;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: order must be >= 1");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<GaussRule>(make_rule(n))).first;
  return *it->second;
}

void map_rule(const GaussRule& rule, double a, double b, std::vector<double>& x,
              std::vector<double>& w) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const std::size_t n = rule.nodes.size();
  x.resize(n);
  w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = mid + half * rule.nodes[i];
    w[i] = half * rule.weights[i];
  }
}

}  // namespace berry::quad
