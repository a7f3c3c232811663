#include "berry/nodal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <memory>
#include <thread>

#include "berry/error.hpp"

namespace berry {
namespace {

constexpr int kBlockRows = 256;

struct Corner {
  Vec2 p;
  double v;
};

Vec2 crossing(const Corner& a, const Corner& b) {
  const double t = a.v / (a.v - b.v);
  return a.p + (b.p - a.p) * t;
}

// Marching squares over rows [j_begin, j_end) of cells. `vals` holds node
// values for node rows j_begin..j_end (column c = node row j_begin + c).
template <class Emit>
void march_rows(const GridSpec& g, const Eigen::MatrixXd& vals, int j_begin, int j_end,
                const ScalarFieldView& field, Emit&& emit) {
  for (int j = j_begin; j < j_end; ++j) {
    const int c = j - j_begin;
    const double y0 = g.y(j);
    const double y1 = g.y(j + 1);
    for (int i = 0; i < g.nx; ++i) {
      const Corner c00{{g.x(i), y0}, vals(i, c)};
      const Corner c10{{g.x(i + 1), y0}, vals(i + 1, c)};
      const Corner c01{{g.x(i), y1}, vals(i, c + 1)};
      const Corner c11{{g.x(i + 1), y1}, vals(i + 1, c + 1)};
      const int code = (c00.v > 0) | (c10.v > 0) << 1 | (c11.v > 0) << 2 | (c01.v > 0) << 3;
      if (code == 0 || code == 15) continue;
      // Edges: bottom 00-10, right 10-11, top 01-11, left 00-01.
      auto bottom = [&] { return crossing(c00, c10); };
      auto right = [&] { return crossing(c10, c11); };
      auto top = [&] { return crossing(c01, c11); };
      auto left = [&] { return crossing(c00, c01); };
      switch (code) {
        case 1: case 14: emit(i, j, left(), bottom()); break;
        case 2: case 13: emit(i, j, bottom(), right()); break;
        case 3: case 12: emit(i, j, left(), right()); break;
        case 4: case 11: emit(i, j, right(), top()); break;
        case 6: case 9: emit(i, j, bottom(), top()); break;
        case 7: case 8: emit(i, j, left(), top()); break;
        case 5: case 10: {
          const Vec2 mid{0.5 * (c00.p.x + c10.p.x), 0.5 * (y0 + y1)};
          const bool center_pos = field.value(mid) > 0;
          const bool diag_pos = (code == 5);  // sign of corners 00 and 11
          if (center_pos == diag_pos) {
            // 00 and 11 connect through the center: isolate 10 and 01.
            emit(i, j, bottom(), right());
            emit(i, j, top(), left());
          } else {
            emit(i, j, left(), bottom());
            emit(i, j, right(), top());
          }
          break;
        }
        default: break;
      }
    }
  }
}

// Runs `work(j_begin, j_end, vals, slot)` over fixed row blocks, optionally
// across threads. Block boundaries never depend on the thread count.
template <class Work>
void for_each_block(const GridSpec& g, const ScalarFieldView& field, int threads,
                    Work&& work) {
  const std::vector<double> xs = g.xs();
  const std::vector<double> ys = g.ys();
  const int n_blocks = (g.ny + kBlockRows - 1) / kBlockRows;
  const ScalarFieldView::RowEvaluator rows = field.prepare(xs);
  auto run = [&](int b) {
    const int j0 = b * kBlockRows;
    const int j1 = std::min(g.ny, j0 + kBlockRows);
    const std::span<const double> yb(ys.data() + j0, static_cast<std::size_t>(j1 - j0 + 1));
    const Eigen::MatrixXd vals = rows(yb);
    work(j0, j1, vals, b);
  };
  threads = std::max(1, std::min(threads, n_blocks));
  if (threads == 1) {
    for (int b = 0; b < n_blocks; ++b) run(b);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int b = t; b < n_blocks; b += threads) run(b);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Liang-Barsky clip of segment ab to rect; returns the clipped length.
double clipped_length(Vec2 a, Vec2 b, const RectDomain& r) {
  double t0 = 0.0;
  double t1 = 1.0;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - r.x0, r.x1 - a.x, a.y - r.y0, r.y1 - a.y};
  for (int k = 0; k < 4; ++k) {
    if (p[k] == 0.0) {
      if (q[k] < 0.0) return 0.0;
      continue;
    }
    const double t = q[k] / p[k];
    if (p[k] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 >= t1) return 0.0;
  }
  return (t1 - t0) * std::hypot(dx, dy);
}

}  // namespace

ScalarFieldView ScalarFieldView::of(const PlaneWaveField& f) {
  return {[&f](std::span<const double> xs) -> RowEvaluator {
            auto ev = std::make_shared<PlaneWaveField::TensorEvaluator>(f, xs);
            return [ev](std::span<const double> ys) { return (*ev)(ys); };
          },
          [&f](Vec2 x) { return f.value(x); }};
}

ScalarFieldView ScalarFieldView::of(std::function<double(Vec2)> f) {
  return {[f](std::span<const double> xs_in) -> RowEvaluator {
            std::vector<double> xs(xs_in.begin(), xs_in.end());
            return [f, xs](std::span<const double> ys) {
              Eigen::MatrixXd m(xs.size(), ys.size());
              for (std::size_t j = 0; j < ys.size(); ++j)
                for (std::size_t i = 0; i < xs.size(); ++i) m(i, j) = f({xs[i], ys[j]});
              return m;
            };
          },
          f};
}

std::vector<double> GridSpec::xs() const {
  std::vector<double> v(nx + 1);
  for (int i = 0; i <= nx; ++i) v[i] = x(i);
  return v;
}

std::vector<double> GridSpec::ys() const {
  std::vector<double> v(ny + 1);
  for (int j = 0; j <= ny; ++j) v[j] = y(j);
  return v;
}

GridSpec make_grid(const RectDomain& rect, double energy, int ppw, int cell_multiple) {
  if (ppw < 4) throw ConfigError("points_per_wavelength must be at least 4");
  if (!(energy > 0.0)) throw ConfigError("energy must be positive");
  if (rect.degenerate()) throw GeometryError("cannot grid a degenerate rectangle");
  const double h = 1.0 / (ppw * std::sqrt(energy));
  auto cells = [&](double len) {
    const double n = std::ceil(len / h - 1e-9);
    const double m = std::ceil(n / cell_multiple) * cell_multiple;
    return std::max<double>(cell_multiple, m);
  };
  const double nx = cells(rect.width());
  const double ny = cells(rect.height());
  if (nx * ny > 1e9) throw ResourceError("nodal grid would exceed 1e9 cells");
  return {rect, static_cast<int>(nx), static_cast<int>(ny)};
}

NodalSet extract_nodal(const PlaneWaveField& field, const RectDomain& rect, int ppw) {
  NodalOptions opts;
  opts.points_per_wavelength = ppw;
  return extract_nodal(ScalarFieldView::of(field), field.energy(), rect, opts);
}

NodalSet extract_nodal(const ScalarFieldView& field, double energy, const RectDomain& rect,
                       const NodalOptions& opts) {
  NodalSet ns;
  ns.grid = make_grid(rect, energy, opts.points_per_wavelength, opts.cell_multiple);
  const int n_blocks = (ns.grid.ny + kBlockRows - 1) / kBlockRows;
  std::vector<std::vector<NodalSegment>> parts(n_blocks);
  for_each_block(ns.grid, field, opts.threads,
                 [&](int j0, int j1, const Eigen::MatrixXd& vals, int b) {
                   auto& out = parts[b];
                   march_rows(ns.grid, vals, j0, j1, field, [&](int i, int j, Vec2 a, Vec2 c) {
                     out.push_back({i, j, a, c});
                   });
                 });
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  ns.segments.reserve(total);
  for (auto& p : parts) ns.segments.insert(ns.segments.end(), p.begin(), p.end());
  for (const auto& s : ns.segments) ns.total_length += s.length();
  return ns;
}

double nodal_length(const NodalSet& ns, const RectDomain& rect) {
  if (!ns.grid.bounds.contains(rect)) throw DomainError("rectangle lies outside the nodal grid");
  if (rect.degenerate()) return 0.0;
  const GridSpec& g = ns.grid;
  // Cells fully inside the rectangle contribute their segments unclipped.
  const double hx = g.hx();
  const double hy = g.hy();
  double s = 0.0;
  for (const auto& seg : ns.segments) {
    const double cx0 = g.x(seg.cell_i);
    const double cy0 = g.y(seg.cell_j);
    if (cx0 >= rect.x0 && cx0 + hx <= rect.x1 && cy0 >= rect.y0 && cy0 + hy <= rect.y1) {
      s += seg.length();
    } else if (cx0 + hx > rect.x0 && cx0 < rect.x1 && cy0 + hy > rect.y0 && cy0 < rect.y1) {
      s += clipped_length(seg.a, seg.b, rect);
    }
  }
  return s;
}

double theoretical_mean_density(double energy) {
  return std::numbers::pi / std::numbers::sqrt2 * std::sqrt(energy);
}

double nodal_normalization(double energy) {
  if (!(energy > 1.0)) throw NormalizationError("normalization needs log E > 0");
  return std::sqrt(512.0 * std::numbers::pi / std::log(energy));
}

CumulativeLengthGrid::CumulativeLengthGrid(int K, double energy, Eigen::MatrixXd raw)
    : K_(K),
      energy_(energy),
      raw_(std::move(raw)),
      mean_density_(theoretical_mean_density(energy)),
      factor_(nodal_normalization(energy)) {
  if (raw_.rows() != size() || raw_.cols() != size())
    throw ConfigError("cumulative grid has the wrong shape");
}

CumulativeLengthGrid CumulativeLengthGrid::with_mean_density(double rho) const {
  CumulativeLengthGrid g = *this;
  g.mean_density_ = rho;
  return g;
}

double CumulativeLengthGrid::normalized(int i1, int i2) const {
  const double n = std::ldexp(1.0, K_);
  const double area = (i1 / n) * (i2 / n);
  return factor_ * (raw_(i1, i2) - mean_density_ * area);
}

Eigen::MatrixXd CumulativeLengthGrid::normalized() const {
  Eigen::MatrixXd m(size(), size());
  for (int j = 0; j < size(); ++j)
    for (int i = 0; i < size(); ++i) m(i, j) = normalized(i, j);
  return m;
}

CumulativeLengthGrid partition_function(const PlaneWaveField& field, int K, int ppw) {
  NodalOptions opts;
  opts.points_per_wavelength = ppw;
  return partition_function(ScalarFieldView::of(field), field.energy(), K, opts);
}

CumulativeLengthGrid partition_function(const ScalarFieldView& field, double energy, int K,
                                        const NodalOptions& opts) {
  if (K < 1 || K > 12) throw ConfigError("partition level K must be in [1, 12]");
  nodal_normalization(energy);  // validates E before the expensive pass
  const int n = 1 << K;
  const GridSpec g =
      make_grid(RectDomain::unit(), energy, opts.points_per_wavelength,
                std::max(n, opts.cell_multiple));
  const int per_x = g.nx / n;
  const int per_y = g.ny / n;
  const int n_blocks = (g.ny + kBlockRows - 1) / kBlockRows;
  std::vector<Eigen::MatrixXd> masses(n_blocks, Eigen::MatrixXd::Zero(n, n));
  for_each_block(g, field, opts.threads,
                 [&](int j0, int j1, const Eigen::MatrixXd& vals, int b) {
                   Eigen::MatrixXd& m = masses[b];
                   march_rows(g, vals, j0, j1, field, [&](int i, int j, Vec2 a, Vec2 c) {
                     m(i / per_x, j / per_y) += norm(c - a);
                   });
                 });
  Eigen::MatrixXd cell = Eigen::MatrixXd::Zero(n, n);
  for (const auto& m : masses) cell += m;
  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int j = 1; j <= n; ++j)
    for (int i = 1; i <= n; ++i)
      raw(i, j) = cell(i - 1, j - 1) + raw(i - 1, j) + raw(i, j - 1) - raw(i - 1, j - 1);
  return CumulativeLengthGrid(K, energy, std::move(raw));
}

int default_partition_level(double energy) {
  return std::max(3, static_cast<int>(std::floor(std::pow(std::log(energy), 0.1))) + 2);
}

double discretize(const CumulativeLengthGrid& grid, Vec2 t) {
  const PartitionIndex p = snap_to_partition(t, grid.K());
  return grid.normalized(p.i1, p.i2);
}

double boundary_sup(const CumulativeLengthGrid& grid) {
  const int n = grid.size() - 1;
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    s = std::max(s, std::abs(grid.normalized(k, n)));
    s = std::max(s, std::abs(grid.normalized(n, k)));
    s = std::max(s, std::abs(grid.normalized(k, 0)));
    s = std::max(s, std::abs(grid.normalized(0, k)));
  }
  return s;
}

double pair_with_test_function(const NodalSet& ns, const TensorBump& phi, double energy) {
  return pair_with_test_function(ns, phi, energy, theoretical_mean_density(energy));
}

double pair_with_test_function(const NodalSet& ns, const TensorBump& phi, double energy,
                               double mean_density) {
  const double factor = nodal_normalization(energy);
  if (phi.is_zero()) return 0.0;
  if (!ns.grid.bounds.contains(phi.support()))
    throw DomainError("test function support leaves the nodal grid");
  const RectDomain& s = phi.support();
  double sum = 0.0;
  for (const auto& seg : ns.segments) {
    const Vec2 mid = (seg.a + seg.b) * 0.5;
    if (mid.x <= s.x0 || mid.x >= s.x1 || mid.y <= s.y0 || mid.y >= s.y1) continue;
    sum += phi(mid) * seg.length();
  }
  return factor * (sum - mean_density * phi.integral());
}

GridSup field_sup(const PlaneWaveField& field, const RectDomain& rect, int ppw) {
  const GridSpec g = make_grid(rect, field.energy(), ppw);
  const ScalarFieldView view = ScalarFieldView::of(field);
  GridSup best{-1.0, {}};
  int bi = 0;
  int bj = 0;
  // Blocks run in order on one thread; ties resolve to the first node.
  for_each_block(g, view, 1, [&](int j0, int j1, const Eigen::MatrixXd& vals, int) {
    for (int c = 0; c <= j1 - j0; ++c)
      for (int i = 0; i <= g.nx; ++i) {
        const double v = std::abs(vals(i, c));
        if (v > best.value) {
          best.value = v;
          bi = i;
          bj = j0 + c;
        }
      }
  });
  best.location = {g.x(bi), g.y(bj)};
  const double hx = 0.5 * g.hx();
  const double hy = 0.5 * g.hy();
  const Vec2 centre = best.location;
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      if (di == 0 && dj == 0) continue;
      const Vec2 p{std::clamp(centre.x + di * hx, rect.x0, rect.x1),
                   std::clamp(centre.y + dj * hy, rect.y0, rect.y1)};
      const double v = std::abs(field.value(p));
      if (v > best.value) best = {v, p};
    }
  return best;
}

void write_nodal_csv(std::ostream& os, const NodalSet& ns) {
  os << "# schema_version=1\n";
  os << "cell_i,cell_j,x0,y0,x1,y1,len\n";
  os.precision(17);
  for (const auto& s : ns.segments)
    os << s.cell_i << ',' << s.cell_j << ',' << s.a.x << ',' << s.a.y << ',' << s.b.x << ','
       << s.b.y << ',' << s.length() << '\n';
}

void write_grid_csv(std::ostream& os, const CumulativeLengthGrid& grid) {
  os << "# schema_version=1\n";
  os << "i1,i2,raw,normalized\n";
  os.precision(17);
  for (int i1 = 0; i1 < grid.size(); ++i1)
    for (int i2 = 0; i2 < grid.size(); ++i2)
      os << i1 << ',' << i2 << ',' << grid.raw(i1, i2) << ',' << grid.normalized(i1, i2) << '\n';
}

}  // namespace berry
