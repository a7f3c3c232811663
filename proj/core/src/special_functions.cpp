#include "berry/special_functions.hpp"

#include <cfloat>
#include <cmath>
#include <numbers>

#include "berry/error.hpp"

namespace berry::special {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

struct SeriesResult {
  long double value;
  long double max_term;
  long double last_term;
};

// J_nu(x) = sum_m (-1)^m (x/2)^(2m+nu) / (m! (m+nu)!), summed in extended
// precision so the cancellation near the crossover stays under budget.
SeriesResult power_series(int nu, double x) {
  const long double half = 0.5L * static_cast<long double>(x);
  const long double q = -half * half;
  long double term = 1.0L;
  for (int k = 1; k <= nu; ++k) term *= half / k;
  long double sum = term;
  long double max_term = std::fabs(term);
  for (int m = 1; m < 80; ++m) {
    term *= q / (static_cast<long double>(m) * (m + nu));
    sum += term;
    max_term = std::max(max_term, std::fabs(term));
    if (std::fabs(term) < 1e-21L * std::max(1.0L, std::fabs(sum))) break;
  }
  return {sum, max_term, term};
}

// Hankel expansion terms P_nu, Q_nu for x >= crossover.
struct HankelPQ {
  double p;
  double q;
  double tail;
};

HankelPQ hankel_pq(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  const double inv8x = 1.0 / (8.0 * x);
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) * inv8x / k;
    const double mag = std::fabs(term);
    if (mag > prev) break;  // asymptotic series started to diverge
    prev = mag;
    // Signs cycle as +q, -p, -q, +p starting at k = 1.
    switch (k % 4) {
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
      default: p += term; break;
    }
    if (mag < 1e-17) break;
  }
  return {p, q, prev};
}

// cos(omega_nu), sin(omega_nu) for omega_nu = (2 nu + 1) pi / 4.
void phase_shift(int nu, double& c, double& s) {
  switch (nu) {
    case 0: c = kInvSqrt2; s = kInvSqrt2; break;
    case 1: c = -kInvSqrt2; s = kInvSqrt2; break;
    default: c = -kInvSqrt2; s = -kInvSqrt2; break;
  }
}

EvalReport asymptotic(int nu, double ax, double sx, double cx) {
  const HankelPQ pq = hankel_pq(nu, ax);
  double cw = 0.0;
  double sw = 0.0;
  phase_shift(nu, cw, sw);
  const double cos_chi = cx * cw + sx * sw;
  const double sin_chi = sx * cw - cx * sw;
  const double amp = std::sqrt(2.0 / (std::numbers::pi * ax));
  const double value = amp * (pq.p * cos_chi - pq.q * sin_chi);
  const double err = amp * (pq.tail + 8.0 * DBL_EPSILON) + DBL_EPSILON * std::fabs(value);
  return {value, BesselMethod::asymptotic, err};
}

void check_finite(double x) {
  if (!std::isfinite(x)) throw DomainError("bessel_j: argument must be finite");
}

EvalReport positive_report(int nu, double ax) {
  if (ax <= kSeriesCrossover) {
    const SeriesResult s = power_series(nu, ax);
    const double value = static_cast<double>(s.value);
    const double err = static_cast<double>(4.0L * LDBL_EPSILON * s.max_term +
                                           std::fabs(s.last_term)) +
                       0.5 * DBL_EPSILON * std::fabs(value);
    return {value, BesselMethod::series, err};
  }
  double sx = 0.0;
  double cx = 0.0;
  sx = std::sin(ax);
  cx = std::cos(ax);
  return asymptotic(nu, ax, sx, cx);
}

}  // namespace

EvalReport bessel_j_report(int nu, double x) {
  check_finite(x);
  if (nu < 0 || nu > 2) throw DomainError("bessel_j: order must be 0, 1 or 2");
  const double ax = std::fabs(x);
  EvalReport r;
  if (nu == 2 && ax >= 1e-3) {
    const EvalReport r0 = positive_report(0, ax);
    const EvalReport r1 = positive_report(1, ax);
    r.value = 2.0 * r1.value / ax - r0.value;
    r.method = r1.method;
    r.est_abs_error = 2.0 * r1.est_abs_error / ax + r0.est_abs_error +
                      DBL_EPSILON * (std::fabs(r0.value) + std::fabs(r.value));
  } else {
    r = positive_report(nu, ax);
  }
  if (x < 0 && nu == 1) r.value = -r.value;
  return r;
}

double bessel_j(int nu, double x) { return bessel_j_report(nu, x).value; }

EvalReport bessel_j_branch(int nu, double x, BesselMethod method) {
  check_finite(x);
  if (nu < 0 || nu > 1) throw DomainError("bessel_j_branch: order must be 0 or 1");
  if (!(x > 0.0)) throw DomainError("bessel_j_branch: argument must be positive");
  if (method == BesselMethod::series) {
    const SeriesResult s = power_series(nu, x);
    return {static_cast<double>(s.value), method,
            static_cast<double>(4.0L * LDBL_EPSILON * s.max_term + std::fabs(s.last_term))};
  }
  return asymptotic(nu, x, std::sin(x), std::cos(x));
}

double bessel_j0(double x) { return bessel_j(0, x); }
double bessel_j1(double x) { return bessel_j(1, x); }
double bessel_j2(double x) { return bessel_j(2, x); }

BesselJ01 bessel_j01(double x) {
  check_finite(x);
  const double ax = std::fabs(x);
  BesselJ01 out{};
  if (ax <= kSeriesCrossover) {
    out.j0 = static_cast<double>(power_series(0, ax).value);
    out.j1 = static_cast<double>(power_series(1, ax).value);
  } else {
    const double sx = std::sin(ax);
    const double cx = std::cos(ax);
    out.j0 = asymptotic(0, ax, sx, cx).value;
    out.j1 = asymptotic(1, ax, sx, cx).value;
  }
  if (x < 0) out.j1 = -out.j1;
  return out;
}

double bessel_j1_over_x(double x) {
  const double ax = std::fabs(x);
  if (ax < 1.0) {
    // sum_m (-1)^m (x/2)^(2m) / (2 m! (m+1)!)
    const double q = -0.25 * x * x;
    double term = 0.5;
    double sum = term;
    for (int m = 1; m < 30; ++m) {
      term *= q / (static_cast<double>(m) * (m + 1));
      sum += term;
      if (std::fabs(term) < 1e-18) break;
    }
    return sum;
  }
  return bessel_j1(ax) / ax;
}

double bessel_j2_over_x2(double x) {
  const double ax = std::fabs(x);
  if (ax < 1.0) {
    // sum_m (-1)^m (x/2)^(2m) / (4 m! (m+2)!)
    const double q = -0.25 * x * x;
    double term = 0.125;
    double sum = term;
    for (int m = 1; m < 30; ++m) {
      term *= q / (static_cast<double>(m) * (m + 2));
      sum += term;
      if (std::fabs(term) < 1e-19) break;
    }
    return sum;
  }
  const BesselJ01 j = bessel_j01(ax);
  return (2.0 * j.j1 / ax - j.j0) / (ax * ax);
}

double bessel_recurrence_residual(double x) {
  check_finite(x);
  if (x == 0.0) throw DomainError("bessel_recurrence_residual: x must be nonzero");
  return bessel_j0(x) + bessel_j2(x) - 2.0 * bessel_j1(x) / x;
}

double normal_cdf(double z) {
  if (!std::isfinite(z)) throw DomainError("normal_cdf: argument must be finite");
  return 0.5 * std::erfc(-z * kInvSqrt2);
}

}  // namespace berry::special
