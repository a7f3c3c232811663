#include "berry/cov_theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "berry/error.hpp"
#include "berry/quadrature.hpp"
#include "berry/special_functions.hpp"

namespace berry {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAngleTol = 1e-9;

double wavenumber(double energy) {
  if (!(energy > 0.0)) throw DomainError("energy must be positive");
  return 2.0 * kPi * std::sqrt(energy);
}

bool parallel_angles(double a, double b) {
  double d = std::fmod(std::abs(a - b), kPi);
  d = std::min(d, kPi - d);
  return d <= kAngleTol;
}

// int_lo^hi f with panels of at most `h`, doubled until stable.
template <class F>
double oscillatory_integral(F&& f, double lo, double hi, double h, double tol, int doublings) {
  if (!(hi > lo)) return 0.0;
  const int panels = static_cast<int>(std::ceil((hi - lo) / h));
  return quad::integrate_adaptive(f, lo, hi, std::max(1, panels), tol, doublings).value;
}

// Collinear or parallel pair: S1 = [a, b] e1, S2 covering [c, d] on the line
// at distance `gap`, sigma = <n1, n2> = +-1. Integrates f(v) w(v) over the lag
// v = t - s, with w the trapezoidal overlap weight.
double parallel_cov(double a, double b, double c, double d, double gap, double sigma,
                    double energy, double tol, int doublings, bool transverse) {
  const double k = wavenumber(energy);
  const double kl = k * gap;
  auto f = [&](double v) {
    const double tau = std::sqrt(k * k * v * v + kl * kl);
    const BesselKernels bk = bessel_kernels(tau);
    return transverse ? bk.j0j1_x - kl * kl * bk.g : bk.j0j1_x;
  };
  auto w = [&](double v) { return std::max(0.0, std::min(b, d + v) - std::max(a, c + v)); };
  double knots[4] = {a - d, a - c, b - d, b - c};
  std::sort(knots, knots + 4);
  const double h = 1.0 / (2.0 * std::sqrt(energy));
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    sum += oscillatory_integral([&](double v) { return f(v) * w(v); }, knots[i], knots[i + 1],
                                h, tol * 32.0 / 3.0, doublings);
  }
  return sigma * sum / 32.0;
}

// Total variation of r over [lo, hi] from a fine sample, used to size panels.
template <class R>
double variation(R&& r, double lo, double hi) {
  constexpr int n = 512;
  double tv = 0.0;
  double prev = r(lo);
  for (int i = 1; i <= n; ++i) {
    const double cur = r(lo + (hi - lo) * i / n);
    tv += std::abs(cur - prev);
    prev = cur;
  }
  return tv;
}

// Outer polar integral over [lo, hi] split at pi/4; the integrand oscillates
// through J0(R(phi)) so panels follow the variation of R.
template <class F, class R>
double polar_integral(F&& f, R&& r, double lo, double hi) {
  double cuts[3] = {lo, hi, hi};
  int n = 2;
  const double quarter = 0.25 * kPi;
  if (lo < quarter && quarter < hi) {
    cuts[1] = quarter;
    cuts[2] = hi;
    n = 3;
  }
  double sum = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    if (!(b > a)) continue;
    const int panels = 8 + static_cast<int>(std::ceil(2.0 * variation(r, a, b) / kPi));
    sum += quad::integrate_adaptive(f, a, b, panels, 1e-14, 6, 8, 1e-11).value;
  }
  return sum;
}

// sin(phi) cos(phi) ... pieces of the polar reduction for a common-origin pair.
struct Polar {
  double k;
  double l1;
  double l2;
  double cos_t;
  double alpha;

  double q2(double phi) const { return 1.0 - std::sin(2.0 * phi) * cos_t; }
  double radius(double phi) const {
    const double q = std::sqrt(q2(phi));
    return phi < alpha ? k * q * l1 / std::cos(phi) : k * q * l2 / std::sin(phi);
  }
};

Polar make_polar(double l1, double l2, double theta, double energy) {
  if (!(l1 > 0.0 && l2 > 0.0)) throw DomainError("segment lengths must be positive");
  return {wavenumber(energy), l1, l2, std::cos(theta), std::atan2(l2, l1)};
}

bool collinear_theta(double theta) {
  return std::abs(std::sin(theta)) <= kAngleTol;
}

// Common-origin covariance of rays [0, x] d1 and [0, y] d2 for signed x, y,
// keeping the normals of the original segments (see reduced_cov_segments).
double corner_cov(double x, double y, Vec2 d1, Vec2 d2, double energy) {
  if (x == 0.0 || y == 0.0) return 0.0;
  const Vec2 r1 = x > 0 ? d1 : -d1;
  const Vec2 r2 = y > 0 ? d2 : -d2;
  const double theta = std::atan2(cross(r1, r2), dot(r1, r2));
  return a_term(std::abs(x), std::abs(y), theta, energy) +
         b_term(std::abs(x), std::abs(y), theta, energy);
}

}  // namespace

BesselKernels bessel_kernels(double x) {
  x = std::abs(x);
  if (x < 1.0) {
    const double j0 = special::bessel_j0(x);
    const double j1x = special::bessel_j1_over_x(x);
    const double j2x2 = special::bessel_j2_over_x2(x);
    return {j0 * j1x, j0 * j2x2 + j1x * j1x};
  }
  const auto [j0, j1] = special::bessel_j01(x);
  const double j2 = 2.0 * j1 / x - j0;
  return {j0 * j1 / x, (j0 * j2 + j1 * j1) / (x * x)};
}

double psi_kernel(double energy, Vec2 z, Vec2 n1, Vec2 n2) {
  const double k = wavenumber(energy);
  const BesselKernels bk = bessel_kernels(k * norm(z));
  return (dot(n1, n2) * bk.j0j1_x - k * k * dot(z, n1) * dot(z, n2) * bk.g) / 32.0;
}

double exact_cov_segments(const OrientedSegment& s1, const OrientedSegment& s2, double energy,
                          const CovOptions& opts) {
  const double k = wavenumber(energy);
  const Vec2 d1 = s1.direction();
  const Vec2 rel = s2.origin() - s1.origin();
  if (parallel_angles(s1.angle(), s2.angle())) {
    const double sigma = dot(d1, s2.direction()) > 0 ? 1.0 : -1.0;
    const double u0 = dot(rel, d1);
    const double u1 = u0 + sigma * s2.length();
    const double gap = cross(d1, rel);
    return parallel_cov(0.0, s1.length(), std::min(u0, u1), std::max(u0, u1), gap, sigma, energy,
                        opts.abs_tol, opts.max_doublings, true);
  }
  // Frame of S1: rotate so that S1 runs along the positive x axis from 0.
  const double rot = -s1.angle();
  const Vec2 p = rotate(rel, rot);
  const Vec2 e2 = rotate(s2.direction(), rot);
  const Vec2 n1{0.0, 1.0};
  const Vec2 n2{-e2.y, e2.x};
  const double c12 = dot(n1, n2);
  const double l1 = s1.length();
  const double l2 = s2.length();
  auto kernel = [&](double t, double s) {
    const Vec2 z{t - p.x - s * e2.x, -p.y - s * e2.y};
    const BesselKernels bk = bessel_kernels(k * norm(z));
    return c12 * bk.j0j1_x - k * k * dot(z, n1) * dot(z, n2) * bk.g;
  };
  const double h = 1.0 / (2.0 * std::sqrt(energy));
  int p1 = std::max(1, static_cast<int>(std::ceil(l1 / h)));
  int p2 = std::max(1, static_cast<int>(std::ceil(l2 / h)));
  const quad::GaussRule& rule = quad::gauss_legendre(8);
  auto tensor = [&](int n1p, int n2p) {
    const double h1 = l1 / n1p;
    const double h2 = l2 / n2p;
    double total = 0.0;
    for (int a = 0; a < n1p; ++a) {
      for (int b = 0; b < n2p; ++b) {
        double cell = 0.0;
        for (int i = 0; i < 8; ++i) {
          const double t = h1 * (a + 0.5 + 0.5 * rule.nodes[i]);
          double row = 0.0;
          for (int j = 0; j < 8; ++j) {
            const double s = h2 * (b + 0.5 + 0.5 * rule.nodes[j]);
            row += rule.weights[j] * kernel(t, s);
          }
          cell += rule.weights[i] * row;
        }
        total += cell;
      }
    }
    return total * 0.25 * h1 * h2 / 32.0;
  };
  double prev = tensor(p1, p2);
  double err = std::numeric_limits<double>::infinity();
  for (int d = 0; d < opts.max_doublings; ++d) {
    p1 *= 2;
    p2 *= 2;
    const double cur = tensor(p1, p2);
    err = std::abs(cur - prev);
    if (err < opts.abs_tol) return cur;
    prev = cur;
  }
  throw AccuracyError("exact_cov_segments: quadrature did not converge", err);
}

double exact_cov_chains(const PolygonalChain& c1, const PolygonalChain& c2, double energy,
                        const CovOptions& opts) {
  double s = 0.0;
  for (const auto& a : c1.segments())
    for (const auto& b : c2.segments()) s += exact_cov_segments(a, b, energy, opts);
  return s;
}

double reduced_cov_segments(const OrientedSegment& s1, const OrientedSegment& s2,
                            double energy) {
  const Vec2 d1 = s1.direction();
  const Vec2 d2 = s2.direction();
  if (parallel_angles(s1.angle(), s2.angle())) {
    const Vec2 rel = s2.origin() - s1.origin();
    const double sigma = dot(d1, d2) > 0 ? 1.0 : -1.0;
    const double u0 = dot(rel, d1);
    const double u1 = u0 + sigma * s2.length();
    return parallel_cov(0.0, s1.length(), std::min(u0, u1), std::max(u0, u1), cross(d1, rel),
                        sigma, energy, 1e-13, 6, true);
  }
  // Intersection O of the supporting lines; S_i = O + [a_i, b_i] d_i.
  const Vec2 w = s2.origin() - s1.origin();
  const double den = cross(d1, d2);
  const double t_o = cross(w, d2) / den;  // O = p1 + t_o d1
  const Vec2 o = s1.origin() + d1 * t_o;
  const double a1 = -t_o;
  const double b1 = a1 + s1.length();
  const double a2 = dot(s2.origin() - o, d2);
  const double b2 = a2 + s2.length();
  // Inclusion-exclusion over the four corner rectangles anchored at O. A ray
  // reversed relative to its segment flips both the integration direction and
  // the canonical normal, so each corner enters with its plain common-origin
  // value.
  return corner_cov(b1, b2, d1, d2, energy) - corner_cov(a1, b2, d1, d2, energy) -
         corner_cov(b1, a2, d1, d2, energy) + corner_cov(a1, a2, d1, d2, energy);
}

double a_term(double l1, double l2, double theta, double energy) {
  if (collinear_theta(theta)) {
    // Rays on a common line: same direction overlap at the origin, opposite
    // directions only touch there.
    if (std::cos(theta) > 0)
      return parallel_cov(0.0, l1, 0.0, l2, 0.0, 1.0, energy, 1e-14, 6, false);
    return parallel_cov(0.0, l1, -l2, 0.0, 0.0, -1.0, energy, 1e-14, 6, false);
  }
  // Perpendicular pairs: the prefactor cos(theta) vanishes.
  if (std::abs(std::cos(theta)) <= kAngleTol) {
    make_polar(l1, l2, theta, energy);
    return 0.0;
  }
  const Polar pol = make_polar(l1, l2, theta, energy);
  auto f = [&](double phi) {
    const double r = pol.radius(phi);
    const double j0 = special::bessel_j0(r);
    return (1.0 - j0 * j0) / pol.q2(phi);
  };
  auto r = [&](double phi) { return pol.radius(phi); };
  const double integral =
      polar_integral(f, r, 0.0, pol.alpha) + polar_integral(f, r, pol.alpha, 0.5 * kPi);
  return pol.cos_t / (64.0 * pol.k * pol.k) * integral;
}

double b_term(double l1, double l2, double theta, double energy) {
  if (collinear_theta(theta)) return 0.0;
  const Polar pol = make_polar(l1, l2, theta, energy);
  // G(R) = int_0^R psi (J0 J2 + J1^2) dpsi = 1 - J0^2 - R J0 J1.
  auto f = [&](double phi) {
    const double r = pol.radius(phi);
    const auto [j0, j1] = special::bessel_j01(r);
    const double g = 1.0 - j0 * j0 - r * j0 * j1;
    const double q2 = pol.q2(phi);
    return std::sin(phi) * std::cos(phi) * g / (q2 * q2);
  };
  auto r = [&](double phi) { return pol.radius(phi); };
  const double integral =
      polar_integral(f, r, 0.0, pol.alpha) + polar_integral(f, r, pol.alpha, 0.5 * kPi);
  const double s = std::sin(theta);
  return -s * s / (32.0 * pol.k * pol.k) * integral;
}

double parallel_kernel(double u, double L, double c, double d, double energy) {
  if (!(c < d)) throw DomainError("parallel_kernel needs c < d");
  if (L < 0.0) throw DomainError("parallel_kernel needs L >= 0");
  const double k = wavenumber(energy);
  const double kl = k * L;
  auto f = [&](double v) { return bessel_kernels(std::sqrt(v * v + kl * kl)).j0j1_x; };
  const double lo = k * (u - d);
  const double hi = k * (u - c);
  return oscillatory_integral(f, lo, hi, 0.5 * kPi, 1e-13, 6) / k;
}

double asymptotic_cov(const PolygonalChain& c1, const PolygonalChain& c2, double energy) {
  if (!(energy > 0.0)) throw DomainError("energy must be positive");
  return signed_length(c1, c2) / (16.0 * kPi * kPi * std::sqrt(energy));
}

double wiener_sheet_cov(Vec2 t, Vec2 s) { return std::min(t.x, s.x) * std::min(t.y, s.y); }

DisorderSigma disorder_sigma(const std::vector<PolygonalChain>& chains) {
  if (chains.empty()) throw ConfigError("disorder_sigma needs at least one chain");
  const auto n = static_cast<Eigen::Index>(chains.size());
  DisorderSigma out;
  out.sigma.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      out.sigma(i, j) = out.sigma(j, i) = signed_length(chains[i], chains[j]);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.sigma, Eigen::EigenvaluesOnly);
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  const double scale = std::max(1.0, out.sigma.cwiseAbs().maxCoeff());
  out.psd = out.min_eigenvalue >= -1e-9 * scale;
  return out;
}

namespace {

// erfc(x) exp(x^2) for large x.
double erfcx_large(double x) {
  const double inv = 1.0 / (x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n <= 8; ++n) {
    term *= -(2.0 * n - 1.0) * 0.5 * inv;
    sum += term;
  }
  return sum / (x * std::sqrt(kPi));
}

}  // namespace

double boundary_sup_cdf(double z) {
  if (!std::isfinite(z)) throw DomainError("boundary_sup_cdf: non-finite argument");
  if (z < 0.0) throw DomainError("boundary_sup_cdf: z must be nonnegative");
  double tail;
  if (z <= 8.0) {
    tail = std::exp(4.0 * z * z) * special::normal_cdf(-3.0 * z);
  } else {
    tail = 0.5 * erfcx_large(3.0 * z / std::numbers::sqrt2) * std::exp(-0.5 * z * z);
  }
  double v = 1.0 - 3.0 * special::normal_cdf(-z) + tail;
  if (v < 0.0 && v > -1e-12) v = 0.0;
  if (v > 1.0 && v < 1.0 + 1e-12) v = 1.0;
  return v;
}

double whitenoise_cov(const TensorBump& a, const TensorBump& b) {
  return bump_inner_product(a, b);
}

CovTableRow cov_table_row(double energy, double l1, double l2, double theta, double gap) {
  CovTableRow row{energy, l1, l2, theta, gap};
  const OrientedSegment s1({0.0, 0.0}, 0.0, l1);
  const OrientedSegment s2({0.0, gap}, theta, l2);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (gap == 0.0) {
    row.a = a_term(l1, l2, theta, energy);
    row.b = b_term(l1, l2, theta, energy);
  } else {
    row.a = row.b = nan;
  }
  row.exact = exact_cov_segments(s1, s2, energy);
  row.asymptotic = asymptotic_cov(PolygonalChain({s1}), PolygonalChain({s2}), energy);
  row.ratio = row.asymptotic != 0.0 ? row.exact / row.asymptotic : nan;
  return row;
}

void write_covtable_csv(std::ostream& os, const std::vector<CovTableRow>& rows) {
  os << "# schema_version=1\n";
  os << "E,lambda1,lambda2,theta,gap,a_term,b_term,exact_cov,asymptotic,ratio\n";
  const auto old = os.precision(17);
  for (const auto& r : rows)
    os << r.energy << ',' << r.lambda1 << ',' << r.lambda2 << ',' << r.theta << ',' << r.gap << ','
       << r.a << ',' << r.b << ',' << r.exact << ',' << r.asymptotic << ',' << r.ratio << '\n';
  os.precision(old);
}

}  // namespace berry
