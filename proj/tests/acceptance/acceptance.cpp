// Acceptance driver: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,5,19] [--skip-slow] [--threads N]
//
// Exit status 0 when every selected criterion passes, 1 otherwise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "berry/chaos2.hpp"
#include "berry/cov_theory.hpp"
#include "berry/error.hpp"
#include "berry/field.hpp"
#include "berry/geometry.hpp"
#include "berry/montecarlo.hpp"
#include "berry/nodal.hpp"
#include "berry/stats.hpp"

using namespace berry;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Result {
  bool pass = false;
  std::string detail;
};

struct Ctx {
  int threads = 0;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

ExperimentOutput run(ExperimentConfig cfg) {
  cfg.validate();
  return run_experiment(cfg);
}

double sample_var(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// Standard error of the sample variance from the fourth central moment.
double var_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double m = 0;
  for (double x : v) m += x;
  m /= n;
  double m2 = 0, m4 = 0;
  for (double x : v) {
    const double d = (x - m) * (x - m);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  return std::sqrt(std::max(m4 - (n - 3) / (n - 1) * m2 * m2, 0.0) / n);
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
  return {m.col(c).data(), m.col(c).data() + m.rows()};
}

// ---------------------------------------------------------------------------

Result c1_helmholtz(const Ctx&) {
  const double E = 100;
  const auto f = PlaneWaveField::sample(E, 256, 101, 0);
  const double h = 1e-4 / std::sqrt(E);
  const double k2 = 4 * kPi * kPi * E;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const Vec2 x{u(rng), u(rng)};
    const double b = f.value(x);
    const double lap = (f.value({x.x + h, x.y}) + f.value({x.x - h, x.y}) +
                        f.value({x.x, x.y + h}) + f.value({x.x, x.y - h}) - 4 * b) /
                       (h * h);
    worst = std::max(worst, std::abs(lap + k2 * b) / (k2 * (1 + std::abs(b))));
  }
  return {worst <= 1e-3, fmt("max scaled residual %.3g (tol 1e-3)", worst)};
}

Result c2_unit_variance(const Ctx& ctx) {
  const double E = 100;
  const int n = 5000;
  const Vec2 pts[] = {{0.1, 0.2}, {0.5, 0.5}, {0.93, 0.71}};
  const Eigen::MatrixXd rows =
      run_replications(n, 3, resolve_threads(ctx.threads), [&](std::uint64_t r) {
        const auto f = PlaneWaveField::sample(E, default_n_waves(E), 102, r);
        return std::vector<double>{f.value(pts[0]), f.value(pts[1]), f.value(pts[2])};
      });
  bool ok = true;
  std::string d;
  for (int c = 0; c < 3; ++c) {
    const auto v = column(rows, c);
    const double var = sample_var(v);
    const double se = var_se(v);
    const double z = (var - 1) / se;
    ok = ok && std::abs(z) <= 3;
    d += fmt("%sVar=%.4f z=%+.2f", c ? ", " : "", var, z);
  }
  return {ok, d};
}

Result c3_kernel(const Ctx& ctx) {
  const double E = 100;
  const int n = 20000;
  const int lags = 20;
  const Vec2 dir{std::cos(0.3), std::sin(0.3)};
  const Vec2 origin{0.2, 0.3};
  const Eigen::MatrixXd rows =
      run_replications(n, lags + 1, resolve_threads(ctx.threads), [&](std::uint64_t r) {
        const auto f = PlaneWaveField::sample(E, default_n_waves(E), 103, r);
        std::vector<double> row{f.value(origin)};
        for (int i = 1; i <= lags; ++i) row.push_back(f.value(origin + dir * (0.01 * i)));
        return row;
      });
  double worst = 0;
  bool ok = true;
  for (int i = 1; i <= lags; ++i) {
    std::vector<double> prod(n);
    for (int r = 0; r < n; ++r) prod[r] = rows(r, 0) * rows(r, i);
    double m = 0;
    for (double p : prod) m += p;
    m /= n;
    const double se = std::sqrt(sample_var(prod) / n);
    const double target = std::cyl_bessel_j(0.0, 2 * kPi * std::sqrt(E) * 0.01 * i);
    const double err = std::abs(m - target);
    ok = ok && err <= 3 * se + 0.02;
    worst = std::max(worst, err / (3 * se + 0.02));
  }
  return {ok, fmt("worst |emp - J0| / (3 se + 0.02) = %.3f", worst)};
}

Result c4_stripes(const Ctx&) {
  // cos(2 pi 4 x1): one wave along e1 with k = 8 pi, so E = 16.
  const auto f = PlaneWaveField::from_coefficients(16.0, {0.0}, {1.0}, {0.0});
  const double e10 = std::abs(extract_nodal(f, RectDomain::unit(), 10).total_length - 8.0);
  const double e20 = std::abs(extract_nodal(f, RectDomain::unit(), 20).total_length - 8.0);
  const bool within = e10 <= 0.005 * 8.0;
  // The interpolated crossings of a symmetric profile are exact, so both
  // errors can sit at the rounding floor.
  const double floor = 1e-12;
  const bool halving = e20 < e10 || (e10 <= floor && e20 <= floor);
  return {within && halving, fmt("|L-8| = %.3g at ppw 10, %.3g at ppw 20", e10, e20)};
}

Result c5_mean_length(const Ctx& ctx) {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::nodal_length);
  cfg.energies = {100};
  cfg.n_reps = 500;
  cfg.ppw = 40;
  cfg.seed = 105;
  cfg.threads = ctx.threads;
  const auto out = run(cfg);
  const double target = kPi / std::sqrt(2.0) * 10.0;  // 22.2144
  const double mean = out.summary->mean[0];
  const double se = out.summary->se_mean[0];
  const double z = (mean - target) / se;
  const double bias = mean / target - 1;
  auto coarse = cfg;
  coarse.ppw = 10;
  const auto o10 = run(coarse);
  return {std::abs(z) <= 3 && std::abs(bias) <= 0.01,
          fmt("ppw 40: mean %.4f se %.4f z %+.2f bias %+.3f%%; ppw 10 (info): bias %+.3f%%",
              mean, se, z, 100 * bias, 100 * (o10.summary->mean[0] / target - 1))};
}

Result c6_variance_area(const Ctx& ctx) {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::variance_scan);
  cfg.rects = {RectDomain::unit(), RectDomain::anchored(0.5, 0.5)};
  cfg.n_reps = 2000;
  cfg.seed = 106;
  cfg.threads = ctx.threads;
  cfg.energies = {1000};
  const auto a = run(cfg);
  const auto& ra = a.report["rects"];
  const double lo0 = ra[0]["ci95"][0], hi0 = ra[0]["ci95"][1];
  const double lo1 = ra[1]["ci95"][0], hi1 = ra[1]["ci95"][1];
  const bool overlap = lo0 <= hi1 && lo1 <= hi0;
  cfg.energies = {4096};
  const auto b = run(cfg);
  const double q = b.report["rects"][1]["normalized_variance_per_area"].get<double>() /
                   b.report["rects"][0]["normalized_variance_per_area"].get<double>();
  const bool band = q >= 0.5 && q <= 1.5;
  return {overlap && band,
          fmt("E=1000 normalized Var/area: [%.3f, %.3f] vs [%.3f, %.3f]; E=4096 ratio %.3f; "
              "absolute level (info) %.2f",
              lo0, hi0, lo1, hi1, q, b.report["rects"][0]["normalized_variance_per_area"].get<double>())};
}

Result c7_green(const Ctx&) {
  const double E = 500;
  const RectDomain rects[] = {RectDomain::unit(), RectDomain::anchored(0.5, 0.3),
                              {0.2, 0.1, 0.9, 0.45}, {0.05, 0.6, 0.35, 0.95},
                              {0.4, 0.4, 0.6, 0.8}};
  double worst = 0;
  for (int r = 0; r < 50; ++r) {
    const auto f = PlaneWaveField::sample(E, default_n_waves(E), 107, r);
    for (const auto& d : rects) {
      const double boundary = phi_boundary(f, rect_boundary_chain(d), 2).raw;
      const double domain = chaos2_domain_raw(f, d, 2);
      worst = std::max(worst, std::abs(boundary - domain) / (1 + std::abs(domain)));
    }
  }
  return {worst <= 1e-6, fmt("max |boundary - domain| / (1 + |domain|) = %.3g", worst)};
}

Result c8_exact_var(const Ctx& ctx) {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::chaos2_var);
  cfg.energies = {500};
  cfg.n_reps = 2000;
  cfg.seed = 108;
  cfg.threads = ctx.threads;
  const auto out = run(cfg);
  const auto v = column(out.rows, 0);
  const double var = sample_var(v);
  const double exact = exact_cov_chains(cfg.chain_list()[0], cfg.chain_list()[0], 500);
  const double se = var_se(v);
  const double z = (var - exact) / se;
  return {std::abs(z) <= 3, fmt("Var %.5g exact %.5g z %+.2f", var, exact, z)};
}

Result c9_asymptotic(const Ctx&) {
  const OrientedSegment s({0.0, 0.0}, 0.0, 1.0);
  const double es[] = {1e2, 1e3, 1e4, 1e5};
  std::vector<double> r;
  for (double E : es) r.push_back(16 * kPi * kPi * std::sqrt(E) * exact_cov_segments(s, s, E));
  bool mono = true;
  for (std::size_t i = 1; i < r.size(); ++i) mono = mono && std::abs(r[i] - 1) < std::abs(r[i - 1] - 1);
  const bool band = r.back() >= 0.9 && r.back() <= 1.1;
  return {mono && band, fmt("ratios %.5f %.5f %.5f %.5f", r[0], r[1], r[2], r[3])};
}

Result c10_decomposition(const Ctx&) {
  std::mt19937_64 rng(110);
  std::uniform_real_distribution<double> len(0.25, 1.5), ang(0.1, 2 * kPi - 0.1);
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const auto cfg = SegmentPairConfig::common_origin(len(rng), len(rng), ang(rng));
    const double exact = exact_cov_segments(cfg.first(), cfg.second(), 100);
    const double sum = a_term(cfg.lambda1, cfg.lambda2, cfg.theta, 100) +
                       b_term(cfg.lambda1, cfg.lambda2, cfg.theta, 100);
    worst = std::max(worst, std::abs(exact - sum));
  }
  return {worst <= 1e-8, fmt("max |exact - (a + b)| = %.3g", worst)};
}

Result c11_decay(const Ctx&) {
  const double th = kPi / 3;
  std::vector<double> lx, la, bn;
  for (double E : {1e2, 3e2, 1e3, 3e3, 1e4, 3e4, 1e5}) {
    lx.push_back(std::log(E));
    la.push_back(std::log(std::abs(a_term(1, 1, th, E))));
    bn.push_back(std::abs(b_term(1, 1, th, E)) * E / std::log(E));
  }
  const LinearFit fit = fit_line(lx, la);
  const double bmax = *std::max_element(bn.begin(), bn.end());
  const double bmin = *std::min_element(bn.begin(), bn.end());
  // Bounded: no growth beyond a factor 10 over three decades.
  const bool bounded = bmax <= 10 * bn.front();
  const bool slope = fit.slope >= -1.2 && fit.slope <= -0.8;
  return {slope && bounded,
          fmt("a slope %.3f; |b| E / log E in [%.3g, %.3g]", fit.slope, bmin, bmax)};
}

Result c12_disorder(const Ctx& ctx) {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::chaos2_cov);
  cfg.energies = {1e4};
  cfg.n_reps = 2000;
  cfg.seed = 112;
  cfg.threads = ctx.threads;
  cfg.chains = nlohmann::json::array({{{"rect", {1.0, 1.0}}}, {{"rect", {0.5, 1.0}}}});
  const auto a = run(cfg);
  const double emp = a.report["covariance"]["empirical"][0][1];
  const double exact = a.report["exact_finite_E"][0][1];
  const double lambda = signed_length(cfg.chain_list()[0], cfg.chain_list()[1]);
  cfg.chains = nlohmann::json::array(
      {{{"rect", {0.0, 0.0, 0.5, 0.5}}}, {{"rect", {0.25, 0.25, 0.75, 0.75}}}});
  cfg.seed = 1120;
  const auto b = run(cfg);
  const double cross = b.report["covariance"]["empirical"][0][1];
  const bool ok = std::abs(lambda - 2.0) < 1e-12 && std::abs(exact - 2.0) <= 0.3 &&
                  std::abs(emp - 2.0) <= 0.3 && std::abs(cross) <= 0.2;
  return {ok, fmt("nested: emp %.3f exact %.3f lambda %.3f; crossing: emp %.3f", emp, exact,
                  lambda, cross)};
}

Result covariance_result(const ExperimentOutput& out) {
  const auto& c = out.report["covariance"];
  double worst = 0;
  for (std::size_t i = 0; i < c["empirical"].size(); ++i)
    for (std::size_t j = 0; j < c["empirical"].size(); ++j) {
      const double e = c["empirical"][i][j].get<double>() - c["target"][i][j].get<double>();
      worst = std::max(worst, std::abs(e) / c["tolerance"][i][j].get<double>());
    }
  return {out.pass, fmt("worst |emp - target| / band = %.2f; diag emp %.3f %.3f %.3f", worst,
                        c["empirical"][0][0].get<double>(), c["empirical"][1][1].get<double>(),
                        c["empirical"][2][2].get<double>())};
}

Result c13_wiener(const Ctx& ctx) {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::sheet_cov);
  cfg.energies = {4096};
  cfg.n_reps = 2000;
  cfg.points = {{0.5, 0.5}, {0.25, 0.75}, {0.75, 0.75}};
  cfg.band = 0.1;
  cfg.se_mult = 0;
  cfg.seed = 113;
  cfg.threads = ctx.threads;
  return covariance_result(run(cfg));
}

Result c14_whitenoise(const Ctx& ctx) {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::whitenoise);
  cfg.energies = {4096};
  cfg.n_reps = 2000;
  cfg.bumps = {TensorBump({0.1, 0.1, 0.45, 0.45}), TensorBump({0.55, 0.55, 0.9, 0.9}),
               TensorBump({0.3, 0.3, 0.7, 0.7})};
  cfg.band = 0.15;
  cfg.se_mult = 0;
  cfg.seed = 114;
  cfg.threads = ctx.threads;
  return covariance_result(run(cfg));
}

Result c15_sup_cdf(const Ctx& ctx) {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::sup_discretized);
  cfg.energies = {4096, 16384, 65536};
  cfg.K = 5;
  cfg.n_reps = 2000;
  cfg.z = {0.5, 1.0, 1.5};
  cfg.band = 0.1;
  cfg.seed = 115;
  cfg.threads = ctx.threads;
  const auto out = run(cfg);
  std::vector<double> err;
  for (const auto& e : out.report["energies"]) err.push_back(e["max_abs_error"]);
  bool mono = true;
  for (std::size_t i = 1; i < err.size(); ++i) mono = mono && err[i] <= err[i - 1];
  const auto& last = out.report["energies"].back()["cdf"];
  std::string d = fmt("max CDF error %.3f %.3f %.3f; at E=65536:", err[0], err[1], err[2]);
  for (const auto& p : last)
    d += fmt(" F(%.1f) %.3f vs %.3f", p["z"].get<double>(), p["empirical"].get<double>(),
             p["formula"].get<double>());
  // The closed form also matches the law of the one-sided boundary supremum
  // of the limit; reported alongside for reference.
  const double E = cfg.energies.back();
  const auto n = static_cast<Eigen::Index>(cfg.n_reps);
  const Eigen::MatrixXd block = out.rows.bottomRows(n).rightCols(out.rows.cols() - 1);
  const Eigen::RowVectorXd centre = block.colwise().mean();
  std::vector<double> up(cfg.n_reps);
  for (Eigen::Index r = 0; r < n; ++r)
    up[r] = ((block.row(r) - centre) * nodal_normalization(E)).maxCoeff();
  d += "; one-sided sup (info):";
  for (double z : cfg.z)
    d += fmt(" F(%.1f) %.3f", z,
             static_cast<double>(std::count_if(up.begin(), up.end(), [z](double s) { return s <= z; })) /
                 static_cast<double>(up.size()));
  return {err.back() <= 0.1 && mono, d};
}

Result c16_sup_moment(const Ctx& ctx) {
  const auto rep = sup_moment_scan({1e2, 1e3, 1e4, 1e5}, 0, 10, 200, 116, resolve_threads(ctx.threads));
  return {rep.fit.r2 >= 0.98,
          fmt("R^2 %.4f slope %.3f; mean sup %.3f %.3f %.3f %.3f", rep.fit.r2, rep.fit.slope,
              rep.mean_sup[0], rep.mean_sup[1], rep.mean_sup[2], rep.mean_sup[3])};
}

Result c17_rescaling(const Ctx& ctx) {
  const double E = 100;
  const double R = 2 * kPi * std::sqrt(E);
  const int n = 2000;
  const auto D = RectDomain::unit();
  const auto chain = rect_boundary_chain(D);
  // Independent streams on the two sides: equal laws, not equal paths.
  const Eigen::MatrixXd rows =
      run_replications(n, 2, resolve_threads(ctx.threads), [&](std::uint64_t r) {
        const auto f = PlaneWaveField::sample(E, default_n_waves(E), 117, r);
        return std::vector<double>{phi_boundary(f, chain).raw, rescaled_chaos2(D, R, 1170, r)};
      });
  const auto a = column(rows, 0), b = column(rows, 1);
  const double va = sample_var(a), vb = sample_var(b);
  const double se = std::hypot(var_se(a), var_se(b));
  const double z = (va - vb) / se;
  return {std::abs(z) <= 3, fmt("Var boundary %.5g, rescaled %.5g, z %+.2f", va, vb, z)};
}

// Signed length by sampling: each sub-step of a segment of `a` contributes
// its length times <n_s, n_t> for every segment t of `c` containing its
// midpoint.
double brute_signed_length(const PolygonalChain& a, const PolygonalChain& c, double step) {
  double total = 0;
  for (const auto& s : a.segments()) {
    const int m = std::max(1, static_cast<int>(std::ceil(s.length() / step)));
    const double h = s.length() / m;
    for (int i = 0; i < m; ++i) {
      const Vec2 p = s.at((i + 0.5) * h);
      for (const auto& t : c.segments()) {
        const Vec2 d = p - t.origin();
        const double along = dot(d, t.direction());
        const double off = std::abs(dot(d, t.normal()));
        if (off < 1e-9 && along >= 0 && along <= t.length())
          total += h * dot(s.normal(), t.normal());
      }
    }
  }
  return total;
}

// Lattice walk from `start` on the quarter lattice, steps in the eight
// compass directions.
std::vector<Vec2> lattice_walk(std::mt19937_64& rng, Vec2 p, int n) {
  std::uniform_int_distribution<int> dir(0, 7), steps(1, 2);
  std::vector<Vec2> v{p};
  for (int i = 0; i < n; ++i) {
    const int d = dir(rng);
    const double ang = d * kPi / 4;
    const double len = steps(rng) * 0.25 * (d % 2 ? std::sqrt(2.0) : 1.0);
    Vec2 q{p.x + len * std::cos(ang), p.y + len * std::sin(ang)};
    q = {std::round(q.x * 4) / 4, std::round(q.y * 4) / 4};
    v.push_back(q);
    p = q;
  }
  return v;
}

std::pair<PolygonalChain, PolygonalChain> lattice_pair(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pos(0, 4), nseg(1, 4), coin(0, 1);
  const auto va = lattice_walk(rng, {pos(rng) / 4.0, pos(rng) / 4.0}, nseg(rng));
  std::vector<Vec2> vc;
  if (coin(rng)) {
    // Reuse a stretch of the first walk, possibly reversed, then wander off.
    std::uniform_int_distribution<std::size_t> at(0, va.size() - 2);
    const std::size_t i = at(rng);
    vc = {va[i], va[i + 1]};
    if (coin(rng)) std::swap(vc[0], vc[1]);
    const auto tail = lattice_walk(rng, vc.back(), nseg(rng) - 1);
    vc.insert(vc.end(), tail.begin() + 1, tail.end());
  } else {
    vc = lattice_walk(rng, {pos(rng) / 4.0, pos(rng) / 4.0}, nseg(rng));
  }
  return {PolygonalChain::from_vertices(va), PolygonalChain::from_vertices(vc)};
}

Result c18_signed_length(const Ctx&) {
  std::mt19937_64 rng(118);
  double worst = 0;
  int nonzero = 0;
  for (int i = 0; i < 100; ++i) {
    const auto [a, c] = lattice_pair(rng);
    const double exact = signed_length(a, c);
    const double brute = brute_signed_length(a, c, 1e-4);
    worst = std::max(worst, std::abs(exact - brute));
    if (std::abs(exact) > 1e-9) ++nonzero;
  }
  return {worst <= 1e-3 && nonzero >= 20,
          fmt("max |analytic - brute| = %.3g over 100 pairs (%d with overlap)", worst, nonzero)};
}

Result c19_determinism(const Ctx&) {
  std::vector<ExperimentConfig> cfgs;
  {
    auto c = ExperimentConfig::defaults(ExperimentKind::nodal_length);
    c.n_reps = 100;
    cfgs.push_back(c);
  }
  {
    auto c = ExperimentConfig::defaults(ExperimentKind::chaos2_var);
    c.n_reps = 500;
    cfgs.push_back(c);
  }
  {
    auto c = ExperimentConfig::defaults(ExperimentKind::sheet_cov);
    c.n_reps = 40;
    cfgs.push_back(c);
  }
  {
    auto c = ExperimentConfig::defaults(ExperimentKind::sup_discretized);
    c.n_reps = 20;
    c.energies = {1024, 2048};
    c.K = 4;
    cfgs.push_back(c);
  }
  bool ok = true;
  std::string d;
  for (auto c : cfgs) {
    c.seed = 119;
    std::string csv[2];
    int k = 0;
    for (int t : {1, 8}) {
      c.threads = t;
      std::ostringstream os;
      write_raw_csv(os, run(c));
      csv[k++] = os.str();
    }
    const bool same = csv[0] == csv[1] && !csv[0].empty();
    ok = ok && same;
    d += fmt("%s%s %s", d.empty() ? "" : ", ", to_string(c.kind).c_str(), same ? "identical" : "DIFFER");
  }
  return {ok, d};
}

struct Criterion {
  int id;
  const char* name;
  bool slow;
  std::function<Result(const Ctx&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  bool skip_slow = false;
  Ctx ctx;
  app.add_option("--only", only, "criterion ids")->delimiter(',');
  app.add_flag("--skip-slow", skip_slow, "skip the slow criteria");
  app.add_option("--threads", ctx.threads, "worker threads (0: automatic)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "helmholtz_residual", false, c1_helmholtz},
      {2, "unit_variance", false, c2_unit_variance},
      {3, "covariance_kernel", false, c3_kernel},
      {4, "deterministic_nodal_length", false, c4_stripes},
      {5, "mean_nodal_length", false, c5_mean_length},
      {6, "variance_area_proportionality", false, c6_variance_area},
      {7, "green_identity", false, c7_green},
      {8, "exact_chaos2_variance", false, c8_exact_var},
      {9, "asymptotic_variance_law", false, c9_asymptotic},
      {10, "decomposition", false, c10_decomposition},
      {11, "decay_orders", false, c11_decay},
      {12, "disorder_covariance", false, c12_disorder},
      {13, "wiener_sheet_covariance", false, c13_wiener},
      {14, "whitenoise_pairing", false, c14_whitenoise},
      {15, "boundary_sup_cdf", true, c15_sup_cdf},
      {16, "sup_moment_scaling", true, c16_sup_moment},
      {17, "rescaling_identity", false, c17_rescaling},
      {18, "signed_length_oracle", false, c18_signed_length},
      {19, "determinism", false, c19_determinism},
  };
  const std::set<int> wanted(only.begin(), only.end());
  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    if (wanted.empty() && skip_slow && c.slow) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = c.fn(ctx);
    } catch (const std::exception& e) {
      r = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!r.pass) ++failed;
    std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << c.id << " " << c.name << ": "
              << r.detail << " [" << fmt("%.1f", secs) << " s]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
