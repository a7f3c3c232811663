#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace berry {

// Column-wise Monte Carlo summary of an n x d sample matrix.
struct StatSummary {
  std::size_t n = 0;
  std::vector<std::string> labels;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;     // unbiased
  Eigen::MatrixXd covariance;   // unbiased
  Eigen::VectorXd se_mean;      // sqrt(var / n)
  Eigen::VectorXd se_variance;  // var sqrt(2 / (n - 1)), Gaussian approximation
  Eigen::VectorXd se_variance_jackknife;
  Eigen::VectorXd skewness;
  Eigen::VectorXd excess_kurtosis;
  Eigen::VectorXd min;
  Eigen::VectorXd max;

  nlohmann::json to_json() const;
};

// Needs n >= 2.
StatSummary summarize(const Eigen::MatrixXd& samples, std::vector<std::string> labels = {});

// Gaussian-approximation standard error of each sample covariance entry,
// sqrt((s_ij^2 + s_ii s_jj) / (n - 1)).
Eigen::MatrixXd covariance_se(const Eigen::MatrixXd& cov, std::size_t n);

struct CltThresholds {
  double max_abs_z = 4.0;
  double ks_scale = 1.63 * 1.5;  // KS bound is ks_scale / sqrt(n)
};

struct CltReport {
  std::size_t n = 0;
  double skewness = 0.0;
  double skewness_z = 0.0;
  double excess_kurtosis = 0.0;
  double kurtosis_z = 0.0;
  double ks = 0.0;  // sup |F_n - Phi| of the standardized sample
  double ks_threshold = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

// Throws DiagnosticError for n < 100 or zero variance.
CltReport clt_diagnostics(const std::vector<double>& samples, const CltThresholds& th = {});

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace berry
