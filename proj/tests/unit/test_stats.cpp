#include <cmath>

#include <gtest/gtest.h>

#include "berry/error.hpp"
#include "berry/rng.hpp"
#include "berry/stats.hpp"

using namespace berry;

namespace {
Eigen::MatrixXd gaussian(int n, int d, std::uint64_t seed, double sigma = 1.0) {
  CounterRng r(seed, 0);
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = sigma * r.normal();
  return m;
}
}  // namespace

TEST(Summary, HandComputed) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 2, 2, 4, 3, 6, 6, 0;
  const auto s = summarize(x, {"a", "b"});
  EXPECT_EQ(s.n, 4u);
  EXPECT_DOUBLE_EQ(s.mean[0], 3.0);
  EXPECT_DOUBLE_EQ(s.variance[0], 14.0 / 3);
  EXPECT_DOUBLE_EQ(s.covariance(0, 1), (-2 * -1 + -1 * 1 + 0 * 3 + 3 * -3) / 3.0);
  EXPECT_DOUBLE_EQ(s.se_mean[0], std::sqrt(14.0 / 3 / 4));
  EXPECT_DOUBLE_EQ(s.se_variance[0], 14.0 / 3 * std::sqrt(2.0 / 3));
  EXPECT_EQ(s.min[1], 0.0);
  EXPECT_EQ(s.max[1], 6.0);
  EXPECT_EQ(s.to_json()["labels"][1], "b");
}

TEST(Summary, CovarianceSymmetricWithVarianceDiagonal) {
  const auto s = summarize(gaussian(300, 4, 1));
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(s.covariance(i, i), s.variance[i], 1e-12);
    for (int j = 0; j < 4; ++j) EXPECT_EQ(s.covariance(i, j), s.covariance(j, i));
  }
}

TEST(Summary, JackknifeMatchesBruteForce) {
  const Eigen::MatrixXd x = gaussian(40, 1, 2);
  const auto s = summarize(x);
  const int n = 40;
  std::vector<double> loo;
  for (int k = 0; k < n; ++k) {
    double m = 0;
    for (int i = 0; i < n; ++i)
      if (i != k) m += x(i, 0);
    m /= n - 1;
    double v = 0;
    for (int i = 0; i < n; ++i)
      if (i != k) v += (x(i, 0) - m) * (x(i, 0) - m);
    loo.push_back(v / (n - 2));
  }
  double mean = 0;
  for (double v : loo) mean += v;
  mean /= n;
  double acc = 0;
  for (double v : loo) acc += (v - mean) * (v - mean);
  EXPECT_NEAR(s.se_variance_jackknife[0], std::sqrt((n - 1.0) / n * acc), 1e-12);
}

TEST(Summary, VarianceEstimatorSanity) {
  int inside = 0;
  const double sigma = 1.7;
  for (int t = 0; t < 100; ++t) {
    const auto s = summarize(gaussian(500, 1, 100 + t, sigma));
    const double band = 3 * sigma * sigma * std::sqrt(2.0 / 499);
    inside += std::abs(s.variance[0] - sigma * sigma) <= band;
  }
  EXPECT_GE(inside, 98);
}

TEST(Summary, RejectsTinySamples) { EXPECT_THROW(summarize(Eigen::MatrixXd(1, 2)), ConfigError); }

TEST(Clt, GaussianNullPasses) {
  const Eigen::MatrixXd x = gaussian(5000, 1, 3);
  const auto r = clt_diagnostics(std::vector<double>(x.data(), x.data() + 5000));
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.ks, r.ks_threshold);
  EXPECT_NEAR(r.ks_threshold, 1.63 * 1.5 / std::sqrt(5000.0), 1e-15);
}

TEST(Clt, DetectsSkewedSample) {
  CounterRng r(4, 0);
  std::vector<double> v;
  for (int i = 0; i < 5000; ++i) v.push_back(-std::log(1 - r.uniform()));
  EXPECT_FALSE(clt_diagnostics(v).pass);
}

TEST(Clt, Errors) {
  EXPECT_THROW(clt_diagnostics(std::vector<double>(500, 2.0)), DiagnosticError);
  EXPECT_THROW(clt_diagnostics(std::vector<double>(50, 1.0)), DiagnosticError);
}

TEST(Fit, ExactLine) {
  const auto f = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
  EXPECT_NEAR(f.slope, 2, 1e-14);
  EXPECT_NEAR(f.intercept, 1, 1e-14);
  EXPECT_NEAR(f.r2, 1, 1e-14);
}

TEST(CovarianceSe, GaussianFormula) {
  Eigen::MatrixXd c(2, 2);
  c << 1, 0.5, 0.5, 2;
  const auto se = covariance_se(c, 101);
  EXPECT_NEAR(se(0, 1), std::sqrt((0.25 + 2) / 100), 1e-15);
  EXPECT_NEAR(se(0, 0), std::sqrt(2.0 / 100), 1e-15);
}
