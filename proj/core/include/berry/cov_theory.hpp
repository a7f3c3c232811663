#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "berry/geometry.hpp"
#include "berry/test_function.hpp"

namespace berry {

// Pair of segments in the standard frame: S1 = [0, lambda1] e1 and
// S2 = offset + [0, lambda2] (cos theta, sin theta).
struct SegmentPairConfig {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double theta = 0.0;
  Vec2 offset;

  static SegmentPairConfig common_origin(double l1, double l2, double theta) {
    return {l1, l2, theta, {}};
  }
  // Parallel segments on lines at distance `gap`, S2 covering [c, d].
  static SegmentPairConfig parallel(double l1, double c, double d, double gap) {
    return {l1, d - c, 0.0, {c, gap}};
  }
  OrientedSegment first() const { return OrientedSegment({0.0, 0.0}, 0.0, lambda1); }
  OrientedSegment second() const { return OrientedSegment(offset, theta, lambda2); }
};

// J0(x) J1(x) / x and (J0(x) J2(x) + J1(x)^2) / x^2, both smooth at 0.
struct BesselKernels {
  double j0j1_x;
  double g;
};
BesselKernels bessel_kernels(double x);

// Covariance density of B<grad B, n1> at x and B<grad B, n2> at y, z = x - y,
// including the (8 pi sqrt(2E))^-2 prefactor of phi_E.
double psi_kernel(double energy, Vec2 z, Vec2 n1, Vec2 n2);

struct CovOptions {
  double abs_tol = 1e-10;
  int max_doublings = 5;
};

// Cov(phi_E(S1), phi_E(S2)) by direct quadrature in the frame of S1. Parallel
// pairs reduce to a 1-D integral over the lag. Throws AccuracyError.
double exact_cov_segments(const OrientedSegment& s1, const OrientedSegment& s2, double energy,
                          const CovOptions& opts = {});
double exact_cov_chains(const PolygonalChain& c1, const PolygonalChain& c2, double energy,
                        const CovOptions& opts = {});

// Same covariance assembled from common-origin a_term + b_term pieces
// anchored at the intersection of the supporting lines (parallel pairs use the
// lag integral). Loses accuracy when the lines meet far from the segments.
double reduced_cov_segments(const OrientedSegment& s1, const OrientedSegment& s2,
                            double energy);

// Common-origin pieces, polar reduction with closed-form inner integrals.
// For theta in {0, pi} a_term is the full collinear covariance and b_term is 0.
double a_term(double lambda1, double lambda2, double theta, double energy);
double b_term(double lambda1, double lambda2, double theta, double energy);

// K^E(u; L, c, d) = k^-1 int_{k(u-d)}^{k(u-c)} J0 J1(r) / r dv,
// r = sqrt(v^2 + (kL)^2), k = 2 pi sqrt(E).
double parallel_kernel(double u, double L, double c, double d, double energy);

// lambda(C1, C2) / (16 pi^2 sqrt(E)).
double asymptotic_cov(const PolygonalChain& c1, const PolygonalChain& c2, double energy);

double wiener_sheet_cov(Vec2 t, Vec2 s);

struct DisorderSigma {
  Eigen::MatrixXd sigma;
  double min_eigenvalue = 0.0;
  bool psd = true;
};
DisorderSigma disorder_sigma(const std::vector<PolygonalChain>& chains);

// 1 - 3 Phi(-z) + exp(4 z^2) Phi(-3z). Throws DomainError for z < 0.
double boundary_sup_cdf(double z);

double whitenoise_cov(const TensorBump& a, const TensorBump& b);

struct CovTableRow {
  double energy = 0.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double theta = 0.0;
  double gap = 0.0;
  double a = 0.0;  // NaN unless the pair has a common origin
  double b = 0.0;
  double exact = 0.0;
  double asymptotic = 0.0;
  double ratio = 0.0;  // exact / asymptotic, NaN when the latter is 0
};
// Row for S1 = [0, lambda1] e1, S2 = (0, gap) + [0, lambda2] (cos theta, sin theta).
CovTableRow cov_table_row(double energy, double lambda1, double lambda2, double theta,
                          double gap);
void write_covtable_csv(std::ostream& os, const std::vector<CovTableRow>& rows);

}  // namespace berry
