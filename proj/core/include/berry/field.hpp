#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "berry/vec2.hpp"

namespace berry {

struct SeedRecord {
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
};

struct FieldEval {
  double value = 0.0;
  Vec2 gradient;             // raw partial derivatives
  Vec2 normalized_gradient;  // gradient / sqrt(2 pi^2 E), unit variance per component
};

// Default number of plane waves for a field observed on a unit-size window.
int default_n_waves(double energy);

// Target covariance J0(2 pi sqrt(E) |z|) of the random wave at lag z.
double covariance_kernel(double energy, Vec2 z);

// A realization of the random plane wave with energy E,
//
//   B(x) = M^{-1/2} sum_m [xi_m cos(k <u_m, x>) + eta_m sin(k <u_m, x>)],
//
// with k = 2 pi sqrt(E) and u_m = (cos theta_m, sin theta_m). Every
// realization is an exact solution of Delta B + k^2 B = 0. Sampled fields use
// equispaced directions theta_m = offset + m pi / M with a uniformly random
// offset and i.i.d. standard normal coefficients. Immutable once built.
class PlaneWaveField {
 public:
  // Throws ConfigError when E <= 0 or M < 2.
  static PlaneWaveField sample(double energy, int n_waves, std::uint64_t seed,
                               std::uint64_t replication);

  // Deterministic field from explicit directions and coefficients (M >= 1).
  static PlaneWaveField from_coefficients(double energy, std::vector<double> angles,
                                          std::vector<double> coeff_cos,
                                          std::vector<double> coeff_sin);

  double energy() const { return energy_; }
  double wavenumber() const { return wavenumber_; }
  int n_waves() const { return static_cast<int>(angles_.size()); }
  double rotation_offset() const { return rotation_offset_; }
  const SeedRecord& seed_record() const { return seed_record_; }
  std::span<const double> angles() const { return angles_; }
  std::span<const double> coeff_cos() const { return coeff_cos_; }
  std::span<const double> coeff_sin() const { return coeff_sin_; }

  double value(Vec2 x) const;
  FieldEval eval(Vec2 x) const;

  enum class Component { value, dx, dy };

  // out(i, j) = component evaluated at (xs[i], ys[j]). Cost is one dense
  // matrix product of size |xs| x 2M x |ys|.
  Eigen::MatrixXd eval_tensor(std::span<const double> xs, std::span<const double> ys,
                              Component c = Component::value) const;

  // Tensor evaluation against a fixed set of x coordinates. The x-direction
  // trig table is built once and reused for every batch of y coordinates.
  class TensorEvaluator {
   public:
    TensorEvaluator(const PlaneWaveField& f, std::span<const double> xs);
    Eigen::MatrixXd operator()(std::span<const double> ys, Component c = Component::value) const;

   private:
    const PlaneWaveField* f_;
    Eigen::MatrixXd xt_;
  };

  struct TensorEval {
    Eigen::MatrixXd value;
    Eigen::MatrixXd dx;
    Eigen::MatrixXd dy;
  };
  // Value and raw gradient on a tensor grid, sharing the trig tables.
  TensorEval eval_tensor_all(std::span<const double> xs, std::span<const double> ys) const;

 private:
  PlaneWaveField() = default;
  void precompute();
  Eigen::MatrixXd x_table(std::span<const double> xs) const;
  Eigen::MatrixXd y_table(std::span<const double> ys, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& b) const;

  double energy_ = 0.0;
  double wavenumber_ = 0.0;
  double rotation_offset_ = 0.0;
  SeedRecord seed_record_;
  std::vector<double> angles_;
  std::vector<double> coeff_cos_;
  std::vector<double> coeff_sin_;

  // k cos(theta_m), k sin(theta_m), xi_m / sqrt(M), eta_m / sqrt(M)
  Eigen::VectorXd kx_;
  Eigen::VectorXd ky_;
  Eigen::VectorXd a_;
  Eigen::VectorXd b_;
};

}  // namespace berry
