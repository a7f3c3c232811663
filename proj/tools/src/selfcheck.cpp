#include "berry/cli/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "berry/field.hpp"
#include "berry/rng.hpp"
#include "berry/special_functions.hpp"

namespace berry::cli {
namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

CheckLine bound_check(const std::string& name, double worst, double limit) {
  return {name, worst <= limit, fmt("worst=%.3g limit=%.3g", worst, limit)};
}

// Chains on a quarter-unit lattice with steps in the eight compass directions,
// so that collinear overlaps between independent draws are common.
PolygonalChain lattice_chain(CounterRng& rng) {
  std::vector<Vec2> v{{std::floor(rng.uniform() * 5) / 4, std::floor(rng.uniform() * 5) / 4}};
  const int n = 1 + static_cast<int>(rng.uniform() * 4);
  for (int k = 0; k < n; ++k) {
    const int d = static_cast<int>(rng.uniform() * 8);
    const double steps = 1 + std::floor(rng.uniform() * 3);
    const double a = d * kPi / 4;
    Vec2 dir{std::round(std::cos(a)), std::round(std::sin(a))};
    v.push_back(v.back() + dir * (steps / 4));
  }
  return PolygonalChain::from_vertices(v);
}

PolygonalChain random_chain(CounterRng& rng) {
  std::vector<Vec2> v;
  const int n = 2 + static_cast<int>(rng.uniform() * 3);
  for (int k = 0; k < n; ++k) v.push_back({rng.uniform(), rng.uniform()});
  return PolygonalChain::from_vertices(v);
}

// A chain whose first segment lies on the supporting line of a random
// segment of `a`, in either orientation.
PolygonalChain collinear_partner(const PolygonalChain& a, CounterRng& rng) {
  const auto& segs = a.segments();
  const auto& s = segs[static_cast<std::size_t>(rng.uniform() * segs.size())];
  const double u = s.length() * (1.2 * rng.uniform() - 0.3);
  const double angle = rng.uniform() < 0.5 ? s.angle() : s.angle() + kPi;
  const OrientedSegment t(s.at(u), angle, 0.1 + rng.uniform());
  const Vec2 tail = t.end() + Vec2{rng.uniform() - 0.5, rng.uniform() - 0.5};
  return PolygonalChain({t, OrientedSegment::from_points(t.end(), tail)});
}

std::pair<PolygonalChain, PolygonalChain> chain_pair(CounterRng& rng, int i) {
  switch (i % 4) {
    case 0: {
      auto a = random_chain(rng);
      auto c = collinear_partner(a, rng);
      return {a, c};
    }
    case 1: {
      auto a = lattice_chain(rng);
      auto c = collinear_partner(a, rng);
      return {a, c};
    }
    case 2: {
      auto a = lattice_chain(rng);
      return {a, lattice_chain(rng)};
    }
    default: {
      auto a = random_chain(rng);
      return {a, random_chain(rng)};
    }
  }
}

PolygonalChain moved(const PolygonalChain& c, double angle, Vec2 shift) {
  std::vector<OrientedSegment> segs;
  for (const auto& s : c.segments())
    segs.emplace_back(rotate(s.origin(), angle) + shift, s.angle() + angle, s.length());
  return PolygonalChain(segs, c.closed());
}

}  // namespace

double brute_force_signed_length(const PolygonalChain& a, const PolygonalChain& c, double step) {
  double total = 0.0;
  for (const auto& s : a.segments()) {
    const auto n = static_cast<long>(std::ceil(s.length() / step));
    const double h = s.length() / static_cast<double>(n);
    for (const auto& t : c.segments()) {
      if (std::abs(cross(s.direction(), t.direction())) > 1e-9) continue;
      const double sign = dot(s.direction(), t.direction()) > 0 ? 1.0 : -1.0;
      for (long k = 0; k < n; ++k) {
        const Vec2 p = s.at((static_cast<double>(k) + 0.5) * h);
        const Vec2 r = p - t.origin();
        if (std::abs(cross(t.direction(), r)) > 1e-9) continue;
        const double u = dot(t.direction(), r);
        if (u >= 0.0 && u <= t.length()) total += sign * h;
      }
    }
  }
  return total;
}

std::vector<CheckLine> selfcheck_special() {
  using namespace berry::special;
  std::vector<CheckLine> out;
  CounterRng rng(2024, 0);

  double parity = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = 100.0 * rng.uniform() - 50.0;
    parity = std::max({parity, std::abs(bessel_j0(-x) - bessel_j0(x)),
                       std::abs(bessel_j1(-x) + bessel_j1(x))});
  }
  out.push_back(bound_check("bessel parity", parity, 0.0));

  double deriv = 0.0;
  double anti = 0.0;
  const double h = 1e-5;
  for (int i = 0; i <= 2000; ++i) {
    const double x = 0.1 + (100.0 - 0.1) * i / 2000.0;
    deriv = std::max(deriv, std::abs((bessel_j0(x + h) - bessel_j0(x - h)) / (2 * h) + bessel_j1(x)));
    auto F = [](double v) {
      const double j0 = bessel_j0(v);
      const double j1 = bessel_j1(v);
      return v * (j0 * j0 + j1 * j1) - j0 * j1;
    };
    anti = std::max(anti, std::abs((F(x + h) - F(x - h)) / (2 * h) - bessel_j0(x) * bessel_j1(x) / x));
  }
  out.push_back(bound_check("J0 derivative equals -J1", deriv, 1e-6));
  out.push_back(bound_check("antiderivative of J0 J1 / v", anti, 1e-6));

  double cross_gap = 0.0;
  for (double x = kSeriesCrossover - 2.0; x <= kSeriesCrossover + 2.0; x += 0.01)
    for (int nu = 0; nu < 2; ++nu)
      cross_gap = std::max(cross_gap, std::abs(bessel_j_branch(nu, x, BesselMethod::series).value -
                                               bessel_j_branch(nu, x, BesselMethod::asymptotic).value));
  out.push_back(bound_check("series and asymptotic branches agree", cross_gap, 1e-10));

  double unit = 0.0;
  double decay = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double x = 200.0 * i / 20000.0;
    for (int nu = 0; nu <= 2; ++nu) {
      const double j = std::abs(bessel_j(nu, x));
      unit = std::max(unit, j - 1.0);
      if (x >= 2.0) decay = std::max(decay, j - 1.0 / std::sqrt(x));
    }
  }
  out.push_back(bound_check("|J| <= 1", std::max(unit, 0.0), 0.0));
  out.push_back(bound_check("|J| <= x^-1/2 for x >= 2", std::max(decay, 0.0), 0.0));

  double recur = 0.0;
  for (int i = 1; i <= 1000; ++i) recur = std::max(recur, std::abs(bessel_recurrence_residual(0.05 * i)));
  out.push_back(bound_check("three-term recurrence", recur, 1e-12));

  double phi = std::abs(normal_cdf(0.0) - 0.5);
  for (double z = -8; z <= 8; z += 0.25) phi = std::max(phi, std::abs(normal_cdf(z) + normal_cdf(-z) - 1.0));
  out.push_back(bound_check("normal cdf symmetry", phi, 1e-15));
  return out;
}

std::vector<CheckLine> selfcheck_field() {
  std::vector<CheckLine> out;
  const double E = 100.0;
  const int M = 256;
  const double k2 = 4.0 * kPi * kPi * E;

  {
    const auto f = PlaneWaveField::sample(E, M, 11, 0);
    CounterRng rng(12, 0);
    const double h = 1e-4 / std::sqrt(E);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vec2 x{rng.uniform(), rng.uniform()};
      const double b = f.value(x);
      const double lap = (f.value(x + Vec2{h, 0}) + f.value(x - Vec2{h, 0}) + f.value(x + Vec2{0, h}) +
                          f.value(x - Vec2{0, h}) - 4.0 * b) / (h * h);
      worst = std::max(worst, std::abs(lap + k2 * b) / (k2 * (1.0 + std::abs(b))));
    }
    out.push_back(bound_check("Helmholtz residual", worst, 1e-3));
  }

  {
    const int n = 5000;
    const Vec2 p{0.3, 0.4};
    const Vec2 d{0.05, 0.02};
    const Vec2 q{0.7, 0.55};
    double vb = 0, gx = 0, gy = 0, c1 = 0, c2 = 0;
    for (int r = 0; r < n; ++r) {
      const auto f = PlaneWaveField::sample(E, M, 13, static_cast<std::uint64_t>(r));
      const FieldEval e = f.eval(p);
      vb += e.value * e.value;
      gx += e.normalized_gradient.x * e.normalized_gradient.x;
      gy += e.normalized_gradient.y * e.normalized_gradient.y;
      c1 += e.value * f.value(p + d);
      c2 += f.value(q) * f.value(q + d);
    }
    // Coefficients are centred by construction, so second moments are used directly.
    const double se = std::sqrt(2.0 / n);
    out.push_back(bound_check("unit variance |var-1|/se", std::abs(vb / n - 1.0) / se, 3.0));
    out.push_back(bound_check("normalized d/dx variance |var-1|/se", std::abs(gx / n - 1.0) / se, 3.0));
    out.push_back(bound_check("normalized d/dy variance |var-1|/se", std::abs(gy / n - 1.0) / se, 3.0));
    const double target = covariance_kernel(E, d);
    const double se_c = std::sqrt((1.0 + target * target) / n);
    out.push_back(bound_check("stationarity |cov(p)-cov(q)|/se", std::abs(c1 - c2) / n / (se_c * std::sqrt(2.0)), 3.0));
  }

  {
    // Discrete direction sum against J0, averaged over the rotation offset.
    const int offsets = 32;
    double worst = 0.0;
    const double zmax = std::min(std::sqrt(2.0), M / (4.0 * kPi * std::sqrt(E)));
    for (int iz = 1; iz <= 40; ++iz) {
      const double rz = zmax * iz / 40.0;
      for (int ia = 0; ia < 8; ++ia) {
        const double phi = ia * kPi / 8.0 + 0.1;
        const Vec2 z{rz * std::cos(phi), rz * std::sin(phi)};
        double err = 0.0;
        for (int o = 0; o < offsets; ++o) {
          const double off = (o + 0.5) * kPi / (M * offsets);
          double s = 0.0;
          for (int m = 0; m < M; ++m) {
            const double a = off + kPi * m / M;
            s += std::cos(2.0 * kPi * std::sqrt(E) * (z.x * std::cos(a) + z.y * std::sin(a)));
          }
          err += std::abs(s / M - covariance_kernel(E, z));
        }
        worst = std::max(worst, err / offsets);
      }
    }
    out.push_back(bound_check("discrete kernel bias", worst, 0.02));
  }
  return out;
}

std::vector<CheckLine> selfcheck_geometry() {
  std::vector<CheckLine> out;
  CounterRng rng(77, 0);

  double split_gap = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto [a, c] = chain_pair(rng, i);
    const double base = signed_length(a, c);
    auto segs = a.segments();
    const auto k = static_cast<std::size_t>(rng.uniform() * segs.size());
    const auto [s1, s2] = segs[k].split(segs[k].length() * (0.05 + 0.9 * rng.uniform()));
    segs[k] = s1;
    segs.insert(segs.begin() + static_cast<long>(k) + 1, s2);
    split_gap = std::max(split_gap, std::abs(signed_length(PolygonalChain(segs), c) - base));
  }
  out.push_back(bound_check("signed length additive under splitting", split_gap, 1e-12));

  double oracle = 0.0;
  int nonzero = 0;
  for (int i = 0; i < 100; ++i) {
    const auto [a, c] = chain_pair(rng, i);
    const double exact = signed_length(a, c);
    if (exact != 0.0) ++nonzero;
    oracle = std::max(oracle, std::abs(exact - brute_force_signed_length(a, c)));
  }
  out.push_back({"signed length matches brute force", oracle <= 1e-3 && nonzero >= 10,
                 fmt("worst=%.3g nonzero_pairs=%.0f", oracle, nonzero)});

  double rigid = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto [a, c] = chain_pair(rng, i);
    const double angle = 2.0 * kPi * rng.uniform();
    const Vec2 shift{rng.uniform() * 4 - 2, rng.uniform() * 4 - 2};
    rigid = std::max(rigid, std::abs(signed_length(moved(a, angle, shift), moved(c, angle, shift)) -
                                     signed_length(a, c)));
  }
  out.push_back(bound_check("signed length invariant under rigid motion", rigid, 1e-9));

  bool idem = true;
  bool mono = true;
  for (int i = 0; i < 1000; ++i) {
    const int K = 1 + static_cast<int>(rng.uniform() * 10);
    const Vec2 t{rng.uniform(), rng.uniform()};
    const Vec2 u{t.x + (1 - t.x) * rng.uniform(), t.y + (1 - t.y) * rng.uniform()};
    const auto p = snap_to_partition(t, K);
    const auto q = snap_to_partition(p.point(), K);
    idem = idem && p.i1 == q.i1 && p.i2 == q.i2;
    const auto w = snap_to_partition(u, K);
    mono = mono && w.i1 >= p.i1 && w.i2 >= p.i2;
  }
  out.push_back({"snap_to_partition idempotent", idem, ""});
  out.push_back({"snap_to_partition monotone", mono, ""});
  return out;
}

}  // namespace berry::cli
