#include "berry/stats.hpp"

#include <algorithm>
#include <cmath>

#include "berry/error.hpp"
#include "berry/special_functions.hpp"

namespace berry {
namespace {

nlohmann::json to_array(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json to_array(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

StatSummary summarize(const Eigen::MatrixXd& x, std::vector<std::string> labels) {
  const auto n = x.rows();
  const auto d = x.cols();
  if (n < 2) throw ConfigError("summary needs at least two replications");
  StatSummary s;
  s.n = static_cast<std::size_t>(n);
  if (labels.empty())
    for (Eigen::Index j = 0; j < d; ++j) labels.push_back("c" + std::to_string(j));
  s.labels = std::move(labels);
  s.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd c = x.rowwise() - s.mean.transpose();
  s.covariance = (c.transpose() * c) / static_cast<double>(n - 1);
  s.covariance = 0.5 * (s.covariance + s.covariance.transpose());
  s.variance = s.covariance.diagonal();
  s.se_mean = (s.variance / static_cast<double>(n)).cwiseSqrt();
  s.se_variance = s.variance * std::sqrt(2.0 / static_cast<double>(n - 1));
  s.skewness.resize(d);
  s.excess_kurtosis.resize(d);
  s.se_variance_jackknife.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::ArrayXd col = c.col(j).array();
    const double m2 = col.square().mean();
    const double m3 = col.cube().mean();
    const double m4 = col.square().square().mean();
    s.skewness[j] = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
    s.excess_kurtosis[j] = m2 > 0 ? m4 / (m2 * m2) - 3.0 : 0.0;
    // Leave-one-out variances in closed form from the centered sums.
    const double nn = static_cast<double>(n);
    const double ss = col.square().sum();
    double mean_loo = 0.0;
    Eigen::ArrayXd loo(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dev = col[i];
      // Removing point i shifts the mean by -dev / (n - 1).
      const double ss_i = ss - dev * dev * nn / (nn - 1.0);
      loo[i] = ss_i / (nn - 2.0);
      mean_loo += loo[i];
    }
    mean_loo /= nn;
    s.se_variance_jackknife[j] =
        n > 2 ? std::sqrt((nn - 1.0) / nn * (loo - mean_loo).square().sum()) : 0.0;
  }
  s.min = x.colwise().minCoeff().transpose();
  s.max = x.colwise().maxCoeff().transpose();
  return s;
}

nlohmann::json StatSummary::to_json() const {
  return {{"n", n},
          {"labels", labels},
          {"mean", to_array(mean)},
          {"variance", to_array(variance)},
          {"covariance", to_array(covariance)},
          {"se_mean", to_array(se_mean)},
          {"se_variance", to_array(se_variance)},
          {"se_variance_jackknife", to_array(se_variance_jackknife)},
          {"skewness", to_array(skewness)},
          {"excess_kurtosis", to_array(excess_kurtosis)},
          {"min", to_array(min)},
          {"max", to_array(max)}};
}

Eigen::MatrixXd covariance_se(const Eigen::MatrixXd& cov, std::size_t n) {
  Eigen::MatrixXd se(cov.rows(), cov.cols());
  for (Eigen::Index i = 0; i < cov.rows(); ++i)
    for (Eigen::Index j = 0; j < cov.cols(); ++j)
      se(i, j) = std::sqrt((cov(i, j) * cov(i, j) + cov(i, i) * cov(j, j)) /
                           static_cast<double>(n - 1));
  return se;
}

CltReport clt_diagnostics(const std::vector<double>& v, const CltThresholds& th) {
  const std::size_t n = v.size();
  if (n < 100) throw DiagnosticError("clt_diagnostics needs at least 100 samples");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double x : v) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  if (!(m2 > 0.0) || m2 <= 1e-300 * (1.0 + mean * mean))
    throw DiagnosticError("clt_diagnostics: sample has zero variance");
  CltReport r;
  r.n = n;
  const double nn = static_cast<double>(n);
  r.skewness = m3 / std::pow(m2, 1.5);
  r.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  r.skewness_z = r.skewness / std::sqrt(6.0 / nn);
  r.kurtosis_z = r.excess_kurtosis / std::sqrt(24.0 / nn);
  const double sd = std::sqrt(m2 * nn / (nn - 1.0));
  std::vector<double> z(v.begin(), v.end());
  for (double& x : z) x = (x - mean) / sd;
  std::sort(z.begin(), z.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = special::normal_cdf(z[i]);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / nn),
                   std::abs(static_cast<double>(i + 1) / nn - f)});
  }
  r.ks = ks;
  r.ks_threshold = th.ks_scale / std::sqrt(nn);
  r.pass = std::abs(r.skewness_z) < th.max_abs_z && std::abs(r.kurtosis_z) < th.max_abs_z &&
           r.ks < r.ks_threshold;
  return r;
}

nlohmann::json CltReport::to_json() const {
  return {{"n", n},           {"skewness", skewness},       {"skewness_z", skewness_z},
          {"excess_kurtosis", excess_kurtosis}, {"kurtosis_z", kurtosis_z}, {"ks", ks},
          {"ks_threshold", ks_threshold},       {"pass", pass}};
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("fit_line needs matching points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

}  // namespace berry
