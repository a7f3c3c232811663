#pragma once

namespace berry::special {

enum class BesselMethod { series, asymptotic };

struct EvalReport {
  double value = 0.0;
  BesselMethod method = BesselMethod::series;
  double est_abs_error = 0.0;
};

// Below this |x| the power series (in extended precision) is used; above it
// the Hankel large-argument expansion.
inline constexpr double kSeriesCrossover = 18.0;

// Bessel functions of the first kind of integer order 0, 1 or 2.
// Absolute error <= 1e-12 for |x| <= 1e6. Throws DomainError on non-finite x
// or unsupported order.
EvalReport bessel_j_report(int nu, double x);
double bessel_j(int nu, double x);

double bessel_j0(double x);
double bessel_j1(double x);
double bessel_j2(double x);

struct BesselJ01 {
  double j0;
  double j1;
};

// Evaluates J0 or J1 at x > 0 with the given branch regardless of the
// crossover. For checking that the two branches meet.
EvalReport bessel_j_branch(int nu, double x, BesselMethod method);

// J0 and J1 together, sharing the trigonometric work of the asymptotic branch.
BesselJ01 bessel_j01(double x);

// J1(x)/x and J2(x)/x^2 with their removable singularities at 0 handled.
double bessel_j1_over_x(double x);
double bessel_j2_over_x2(double x);

// J0(x) + J2(x) - 2 J1(x)/x. Throws DomainError at x == 0.
double bessel_recurrence_residual(double x);

// Standard normal distribution function.
double normal_cdf(double z);

}  // namespace berry::special
