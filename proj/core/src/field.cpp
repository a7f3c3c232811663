#include "berry/field.hpp"

#include <cmath>
#include <numbers>

#include "berry/error.hpp"
#include "berry/rng.hpp"
#include "berry/special_functions.hpp"

namespace berry {

int default_n_waves(double energy) {
  return std::max(256, static_cast<int>(std::ceil(8.0 * std::sqrt(energy))));
}

double covariance_kernel(double energy, Vec2 z) {
  return special::bessel_j0(2.0 * std::numbers::pi * std::sqrt(energy) * norm(z));
}

PlaneWaveField PlaneWaveField::sample(double energy, int n_waves, std::uint64_t seed,
                                      std::uint64_t replication) {
  if (!(energy > 0.0) || !std::isfinite(energy))
    throw ConfigError("sample_field: energy must be positive");
  if (n_waves < 2) throw ConfigError("sample_field: need at least 2 plane waves");
  PlaneWaveField f;
  f.energy_ = energy;
  f.seed_record_ = {seed, replication};
  CounterRng rng(seed, replication);
  f.rotation_offset_ = std::numbers::pi * rng.uniform();
  f.angles_.resize(n_waves);
  f.coeff_cos_.resize(n_waves);
  f.coeff_sin_.resize(n_waves);
  for (int m = 0; m < n_waves; ++m)
    f.angles_[m] = f.rotation_offset_ + std::numbers::pi * m / n_waves;
  for (double& c : f.coeff_cos_) c = rng.normal();
  for (double& c : f.coeff_sin_) c = rng.normal();
  f.precompute();
  return f;
}

PlaneWaveField PlaneWaveField::from_coefficients(double energy, std::vector<double> angles,
                                                 std::vector<double> coeff_cos,
                                                 std::vector<double> coeff_sin) {
  if (!(energy > 0.0)) throw ConfigError("plane wave field: energy must be positive");
  if (angles.empty() || angles.size() != coeff_cos.size() ||
      angles.size() != coeff_sin.size())
    throw ConfigError("plane wave field: directions and coefficients must match in size");
  PlaneWaveField f;
  f.energy_ = energy;
  f.angles_ = std::move(angles);
  f.coeff_cos_ = std::move(coeff_cos);
  f.coeff_sin_ = std::move(coeff_sin);
  f.rotation_offset_ = f.angles_.front();
  f.precompute();
  return f;
}

void PlaneWaveField::precompute() {
  wavenumber_ = 2.0 * std::numbers::pi * std::sqrt(energy_);
  const int m = n_waves();
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  kx_.resize(m);
  ky_.resize(m);
  a_.resize(m);
  b_.resize(m);
  for (int i = 0; i < m; ++i) {
    kx_[i] = wavenumber_ * std::cos(angles_[i]);
    ky_[i] = wavenumber_ * std::sin(angles_[i]);
    a_[i] = coeff_cos_[i] * scale;
    b_[i] = coeff_sin_[i] * scale;
  }
}

double PlaneWaveField::value(Vec2 x) const {
  double v = 0.0;
  for (int m = 0; m < n_waves(); ++m) {
    const double ph = kx_[m] * x.x + ky_[m] * x.y;
    v += a_[m] * std::cos(ph) + b_[m] * std::sin(ph);
  }
  return v;
}

FieldEval PlaneWaveField::eval(Vec2 x) const {
  FieldEval out;
  double gx = 0.0;
  double gy = 0.0;
  for (int m = 0; m < n_waves(); ++m) {
    const double ph = kx_[m] * x.x + ky_[m] * x.y;
    const double c = std::cos(ph);
    const double s = std::sin(ph);
    out.value += a_[m] * c + b_[m] * s;
    const double d = b_[m] * c - a_[m] * s;
    gx += kx_[m] * d;
    gy += ky_[m] * d;
  }
  out.gradient = {gx, gy};
  const double norm_factor = 1.0 / std::sqrt(2.0 * std::numbers::pi * std::numbers::pi * energy_);
  out.normalized_gradient = out.gradient * norm_factor;
  return out;
}

Eigen::MatrixXd PlaneWaveField::x_table(std::span<const double> xs) const {
  const int m = n_waves();
  Eigen::MatrixXd t(static_cast<Eigen::Index>(xs.size()), 2 * m);
  for (int w = 0; w < m; ++w) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double ph = kx_[w] * xs[i];
      t(i, w) = std::cos(ph);
      t(i, m + w) = std::sin(ph);
    }
  }
  return t;
}

// Row j holds [a cos(ky y_j) + b sin(ky y_j), b cos(ky y_j) - a sin(ky y_j)],
// so that x_table * y_table^T = sum_m a cos(phase) + b sin(phase).
Eigen::MatrixXd PlaneWaveField::y_table(std::span<const double> ys, const Eigen::VectorXd& a,
                                        const Eigen::VectorXd& b) const {
  const int m = n_waves();
  Eigen::MatrixXd t(static_cast<Eigen::Index>(ys.size()), 2 * m);
  for (int w = 0; w < m; ++w) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const double ph = ky_[w] * ys[j];
      const double c = std::cos(ph);
      const double s = std::sin(ph);
      t(j, w) = a[w] * c + b[w] * s;
      t(j, m + w) = b[w] * c - a[w] * s;
    }
  }
  return t;
}

Eigen::MatrixXd PlaneWaveField::eval_tensor(std::span<const double> xs,
                                            std::span<const double> ys, Component c) const {
  return TensorEvaluator(*this, xs)(ys, c);
}

PlaneWaveField::TensorEvaluator::TensorEvaluator(const PlaneWaveField& f,
                                                 std::span<const double> xs)
    : f_(&f), xt_(f.x_table(xs)) {}

Eigen::MatrixXd PlaneWaveField::TensorEvaluator::operator()(std::span<const double> ys,
                                                            Component c) const {
  const PlaneWaveField& f = *f_;
  const auto& kx_ = f.kx_;
  const auto& ky_ = f.ky_;
  const auto& a_ = f.a_;
  const auto& b_ = f.b_;
  const Eigen::MatrixXd& xt = xt_;
  Eigen::MatrixXd yt;
  switch (c) {
    case Component::value: yt = f.y_table(ys, a_, b_); break;
    // d/dx of a cos + b sin is kx (b cos - a sin).
    case Component::dx:
      yt = f.y_table(ys, kx_.cwiseProduct(b_), -kx_.cwiseProduct(a_));
      break;
    case Component::dy:
      yt = f.y_table(ys, ky_.cwiseProduct(b_), -ky_.cwiseProduct(a_));
      break;
  }
  Eigen::MatrixXd out(xt.rows(), yt.rows());
  out.noalias() = xt * yt.transpose();
  return out;
}

PlaneWaveField::TensorEval PlaneWaveField::eval_tensor_all(std::span<const double> xs,
                                                           std::span<const double> ys) const {
  const Eigen::MatrixXd xt = x_table(xs);
  TensorEval out;
  Eigen::MatrixXd yt = y_table(ys, a_, b_);
  out.value.noalias() = xt * yt.transpose();
  yt = y_table(ys, kx_.cwiseProduct(b_), -kx_.cwiseProduct(a_));
  out.dx.noalias() = xt * yt.transpose();
  yt = y_table(ys, ky_.cwiseProduct(b_), -ky_.cwiseProduct(a_));
  out.dy.noalias() = xt * yt.transpose();
  return out;
}

}  // namespace berry
