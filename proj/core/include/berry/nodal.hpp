#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "berry/field.hpp"
#include "berry/geometry.hpp"
#include "berry/test_function.hpp"

namespace berry {

// Anything that can be sampled on tensor grids and at single points.
// `prepare(xs)` returns a function mapping a batch of y coordinates to the
// |xs| x |ys| matrix of values.
struct ScalarFieldView {
  using RowEvaluator = std::function<Eigen::MatrixXd(std::span<const double>)>;
  std::function<RowEvaluator(std::span<const double>)> prepare;
  std::function<double(Vec2)> value;

  static ScalarFieldView of(const PlaneWaveField& f);
  // Pointwise function; tensor evaluation loops over the grid.
  static ScalarFieldView of(std::function<double(Vec2)> f);
};

// nx * ny cells covering `bounds`, nodes at x0 + i * (x1 - x0) / nx.
struct GridSpec {
  RectDomain bounds;
  int nx = 0;
  int ny = 0;

  double hx() const { return bounds.width() / nx; }
  double hy() const { return bounds.height() / ny; }
  double x(int i) const { return i == nx ? bounds.x1 : bounds.x0 + bounds.width() * i / nx; }
  double y(int j) const { return j == ny ? bounds.y1 : bounds.y0 + bounds.height() * j / ny; }
  std::vector<double> xs() const;
  std::vector<double> ys() const;
};

// Spacing at most 1 / (ppw sqrt(E)); cell counts rounded up to a multiple of
// `cell_multiple`. Throws ResourceError above 1e9 cells.
GridSpec make_grid(const RectDomain& rect, double energy, int points_per_wavelength,
                   int cell_multiple = 1);

struct NodalSegment {
  int cell_i = 0;
  int cell_j = 0;
  Vec2 a;
  Vec2 b;
  double length() const { return norm(b - a); }
};

struct NodalSet {
  GridSpec grid;
  std::vector<NodalSegment> segments;  // ordered by cell id j * nx + i
  double total_length = 0.0;
};

struct NodalOptions {
  int points_per_wavelength = 10;
  int cell_multiple = 1;
  int threads = 1;
};

NodalSet extract_nodal(const PlaneWaveField& field, const RectDomain& rect,
                       int points_per_wavelength = 10);
NodalSet extract_nodal(const ScalarFieldView& field, double energy, const RectDomain& rect,
                       const NodalOptions& opts = {});

// Nodal length inside `rect`, clipping straddling segments exactly.
double nodal_length(const NodalSet& ns, const RectDomain& rect);

// Expected nodal length per unit area, (pi / sqrt 2) sqrt(E).
double theoretical_mean_density(double energy);
// sqrt(512 pi / log E). Throws NormalizationError for E <= 1.
double nodal_normalization(double energy);

// L_E([0, p_i1] x [0, p_i2]) on the dyadic grid of mesh 2^-K.
class CumulativeLengthGrid {
 public:
  CumulativeLengthGrid(int K, double energy, Eigen::MatrixXd raw);

  int K() const { return K_; }
  int size() const { return (1 << K_) + 1; }
  double energy() const { return energy_; }
  const Eigen::MatrixXd& raw() const { return raw_; }
  double raw(int i1, int i2) const { return raw_(i1, i2); }

  // Density subtracted before scaling; defaults to the theoretical mean.
  double mean_density() const { return mean_density_; }
  double factor() const { return factor_; }
  CumulativeLengthGrid with_mean_density(double rho) const;

  double normalized(int i1, int i2) const;
  Eigen::MatrixXd normalized() const;

 private:
  int K_;
  double energy_;
  Eigen::MatrixXd raw_;
  double mean_density_;
  double factor_;
};

// One marching pass over [0,1]^2 with cells aligned to the dyadic grid.
CumulativeLengthGrid partition_function(const PlaneWaveField& field, int K,
                                        int points_per_wavelength = 10);
CumulativeLengthGrid partition_function(const ScalarFieldView& field, double energy, int K,
                                        const NodalOptions& opts = {});

int default_partition_level(double energy);

// X_E^K(t): normalized value at the dyadic point left-below t.
double discretize(const CumulativeLengthGrid& grid, Vec2 t);
// max |X_E^K| over the boundary of the unit square.
double boundary_sup(const CumulativeLengthGrid& grid);

// sqrt(512 pi / log E) (sum_seg phi(mid) len - rho int phi), rho defaults to
// the theoretical mean density.
double pair_with_test_function(const NodalSet& ns, const TensorBump& phi, double energy);
double pair_with_test_function(const NodalSet& ns, const TensorBump& phi, double energy,
                               double mean_density);

struct GridSup {
  double value = 0.0;  // max |B|
  Vec2 location;
};
// Grid maximum of |B| at the nodal resolution, refined once on the half-step
// lattice around the maximizing node.
GridSup field_sup(const PlaneWaveField& field, const RectDomain& rect,
                  int points_per_wavelength = 10);

void write_nodal_csv(std::ostream& os, const NodalSet& ns);
void write_grid_csv(std::ostream& os, const CumulativeLengthGrid& grid);

}  // namespace berry
