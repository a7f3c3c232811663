#include "berry/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "berry/chaos2.hpp"
#include "berry/cov_theory.hpp"
#include "berry/error.hpp"
#include "berry/field.hpp"
#include "berry/nodal.hpp"

#ifndef BERRY_GIT_DESCRIBE
#define BERRY_GIT_DESCRIBE "unknown"
#endif

namespace berry {
namespace {

constexpr double kPi = std::numbers::pi;

struct KindName {
  ExperimentKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {
    {ExperimentKind::nodal_length, "nodal-length"},
    {ExperimentKind::variance_scan, "variance-scan"},
    {ExperimentKind::sheet_cov, "sheet-cov"},
    {ExperimentKind::chaos2_var, "chaos2-var"},
    {ExperimentKind::chaos2_cov, "chaos2-cov"},
    {ExperimentKind::disorder, "disorder"},
    {ExperimentKind::cov_table, "cov-table"},
    {ExperimentKind::sup_discretized, "sup-discretized"},
    {ExperimentKind::whitenoise, "whitenoise"},
    {ExperimentKind::sup_moment, "sup-moment"},
};

nlohmann::json rect_json(const RectDomain& r) { return {r.x0, r.y0, r.x1, r.y1}; }

RectDomain rect_from_json(const nlohmann::json& j) {
  if (j.size() == 2) return RectDomain::anchored(j[0], j[1]);
  if (j.size() == 4) return {j[0], j[1], j[2], j[3]};
  throw ConfigError("rectangles are [t1,t2] or [x0,y0,x1,y1]");
}

nlohmann::json to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

struct Checks {
  nlohmann::json list = nlohmann::json::array();
  bool all = true;

  void add(const std::string& name, bool ok, nlohmann::json detail = nlohmann::json::object()) {
    detail["name"] = name;
    detail["pass"] = ok;
    list.push_back(std::move(detail));
    all = all && ok;
  }
};

void finish(ExperimentOutput& out, Checks& checks) {
  out.report["checks"] = checks.list;
  out.pass = checks.all;
}

int waves_for(const ExperimentConfig& cfg, double energy) {
  return cfg.n_waves > 0 ? cfg.n_waves : default_n_waves(energy);
}

int level_for(const ExperimentConfig& cfg, double energy) {
  return cfg.K > 0 ? cfg.K : default_partition_level(energy);
}

std::vector<std::string> numbered(const std::string& stem, std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(stem + std::to_string(i));
  return v;
}

ExperimentOutput run_nodal_length(const ExperimentConfig& cfg) {
  const double E = cfg.energies.front();
  const int M = waves_for(cfg, E);
  ExperimentOutput out;
  out.columns = numbered("L", cfg.rects.size());
  out.rows = run_replications(cfg.n_reps, static_cast<int>(cfg.rects.size()),
                              resolve_threads(cfg.threads), [&](std::uint64_t r) {
                                const auto f = PlaneWaveField::sample(E, M, cfg.seed, r);
                                const NodalSet ns = extract_nodal(f, RectDomain::unit(), cfg.ppw);
                                std::vector<double> row;
                                for (const auto& rect : cfg.rects) row.push_back(nodal_length(ns, rect));
                                return row;
                              });
  out.summary = summarize(out.rows, out.columns);
  Checks checks;
  const double rho = theoretical_mean_density(E);
  nlohmann::json per = nlohmann::json::array();
  for (std::size_t i = 0; i < cfg.rects.size(); ++i) {
    const double expected = rho * cfg.rects[i].area();
    const double mean = out.summary->mean[static_cast<Eigen::Index>(i)];
    const double se = out.summary->se_mean[static_cast<Eigen::Index>(i)];
    const double z = (mean - expected) / se;
    const double bias = mean / expected - 1.0;
    per.push_back({{"rect", rect_json(cfg.rects[i])},
                   {"mean", mean},
                   {"se", se},
                   {"expected", expected},
                   {"z", z},
                   {"relative_bias", bias}});
    checks.add("mean_within_3se_" + std::to_string(i), std::abs(z) <= 3.0, {{"z", z}});
    checks.add("bias_below_1pct_" + std::to_string(i), std::abs(bias) <= 0.01,
               {{"relative_bias", bias}});
  }
  out.report["rects"] = per;
  finish(out, checks);
  return out;
}

ExperimentOutput run_variance_scan(const ExperimentConfig& cfg) {
  const double E = cfg.energies.front();
  const int M = waves_for(cfg, E);
  ExperimentOutput out;
  out.columns = numbered("L", cfg.rects.size());
  out.rows = run_replications(cfg.n_reps, static_cast<int>(cfg.rects.size()),
                              resolve_threads(cfg.threads), [&](std::uint64_t r) {
                                const auto f = PlaneWaveField::sample(E, M, cfg.seed, r);
                                const NodalSet ns = extract_nodal(f, RectDomain::unit(), cfg.ppw);
                                std::vector<double> row;
                                for (const auto& rect : cfg.rects) row.push_back(nodal_length(ns, rect));
                                return row;
                              });
  out.summary = summarize(out.rows, out.columns);
  const double scale = 512.0 * kPi / std::log(E);
  nlohmann::json per = nlohmann::json::array();
  std::vector<double> ratio;
  std::vector<double> half;
  for (std::size_t i = 0; i < cfg.rects.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double area = cfg.rects[i].area();
    const double r = out.summary->variance[k] * scale / area;
    // Use the larger of the Gaussian and jackknife standard errors.
    const double se = std::max(out.summary->se_variance[k],
                               out.summary->se_variance_jackknife[k]) * scale / area;
    ratio.push_back(r);
    half.push_back(1.96 * se);
    per.push_back({{"rect", rect_json(cfg.rects[i])},
                   {"area", area},
                   {"variance", out.summary->variance[k]},
                   {"normalized_variance_per_area", r},
                   {"ci95", {r - 1.96 * se, r + 1.96 * se}}});
  }
  out.report["rects"] = per;
  out.report["asymptotic_variance_per_area"] = 1.0 / scale;
  Checks checks;
  for (std::size_t i = 0; i < ratio.size(); ++i)
    for (std::size_t j = i + 1; j < ratio.size(); ++j) {
      const bool overlap = std::abs(ratio[i] - ratio[j]) <= half[i] + half[j];
      const double q = ratio[j] / ratio[i];
      checks.add("ci_overlap_" + std::to_string(i) + "_" + std::to_string(j), overlap,
                 {{"a", ratio[i]}, {"b", ratio[j]}});
      checks.add("area_ratio_band_" + std::to_string(i) + "_" + std::to_string(j),
                 q >= 0.5 && q <= 1.5, {{"ratio", q}});
    }
  finish(out, checks);
  return out;
}

ExperimentOutput run_sheet_cov(const ExperimentConfig& cfg) {
  const double E = cfg.energies.front();
  const int M = waves_for(cfg, E);
  const int K = level_for(cfg, E);
  std::vector<PartitionIndex> idx;
  for (const auto& p : cfg.points) idx.push_back(snap_to_partition(p, K));
  ExperimentOutput out;
  out.columns = numbered("raw", idx.size());
  out.rows = run_replications(cfg.n_reps, static_cast<int>(idx.size()),
                              resolve_threads(cfg.threads), [&](std::uint64_t r) {
                                const auto f = PlaneWaveField::sample(E, M, cfg.seed, r);
                                const auto g = partition_function(f, K, cfg.ppw);
                                std::vector<double> row;
                                for (const auto& p : idx) row.push_back(g.raw(p.i1, p.i2));
                                return row;
                              });
  out.summary = summarize(out.rows, out.columns);
  const double factor = nodal_normalization(E);
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd target(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      target(i, j) = wiener_sheet_cov(idx[i].point(), idx[j].point());
  const auto cmp = covariance_matrix_experiment(out.rows * factor, target,
                                                Eigen::MatrixXd::Constant(n, n, cfg.band),
                                                cfg.se_mult);
  out.report["K"] = K;
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : idx) pts.push_back({p.point().x, p.point().y});
  out.report["snapped_points"] = pts;
  out.report["covariance"] = cmp.to_json();
  Checks checks;
  checks.add("covariance_within_band", cmp.pass);
  finish(out, checks);
  return out;
}

ExperimentOutput run_chaos2_var(const ExperimentConfig& cfg) {
  const double E = cfg.energies.front();
  const int M = waves_for(cfg, E);
  const auto chains = cfg.chain_list();
  ExperimentOutput out;
  out.columns = numbered("phi", chains.size());
  out.rows = run_replications(cfg.n_reps, static_cast<int>(chains.size()),
                              resolve_threads(cfg.threads), [&](std::uint64_t r) {
                                const auto f = PlaneWaveField::sample(E, M, cfg.seed, r);
                                std::vector<double> row;
                                for (const auto& c : chains) row.push_back(phi_boundary(f, c).raw);
                                return row;
                              });
  out.summary = summarize(out.rows, out.columns);
  Checks checks;
  nlohmann::json per = nlohmann::json::array();
  const double tilde = phi_normalization(E) * phi_normalization(E);
  for (std::size_t i = 0; i < chains.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double var = out.summary->variance[k];
    const double se = out.summary->se_variance[k];
    const double exact = exact_cov_chains(chains[i], chains[i], E);
    const double lambda = signed_length(chains[i], chains[i]);
    const double z = (var - exact) / se;
    std::vector<double> col(out.rows.col(k).data(), out.rows.col(k).data() + out.rows.rows());
    for (double& v : col) v *= phi_normalization(E);
    nlohmann::json entry = {{"variance", var},
                            {"se_variance", se},
                            {"exact", exact},
                            {"z", z},
                            {"variance_phi_tilde", var * tilde},
                            {"signed_length", lambda},
                            {"ratio_16pi2sqrtE", var * 16.0 * kPi * kPi * std::sqrt(E) / lambda},
                            {"exact_ratio_16pi2sqrtE",
                             exact * 16.0 * kPi * kPi * std::sqrt(E) / lambda}};
    if (col.size() >= 100) entry["clt"] = clt_diagnostics(col).to_json();
    per.push_back(entry);
    checks.add("variance_matches_exact_" + std::to_string(i), std::abs(z) <= cfg.se_mult,
               {{"z", z}});
  }
  out.report["chains"] = per;
  finish(out, checks);
  return out;
}

ExperimentOutput run_chaos2_cov(const ExperimentConfig& cfg) {
  const double E = cfg.energies.front();
  const int M = waves_for(cfg, E);
  const auto chains = cfg.chain_list();
  ExperimentOutput out;
  out.columns = numbered("phi_tilde", chains.size());
  out.rows = run_replications(cfg.n_reps, static_cast<int>(chains.size()),
                              resolve_threads(cfg.threads), [&](std::uint64_t r) {
                                const auto f = PlaneWaveField::sample(E, M, cfg.seed, r);
                                std::vector<double> row;
                                for (const auto& c : chains) row.push_back(phi_tilde(f, c));
                                return row;
                              });
  out.summary = summarize(out.rows, out.columns);
  const auto n = static_cast<Eigen::Index>(chains.size());
  const DisorderSigma sigma = disorder_sigma(chains);
  Eigen::MatrixXd exact(n, n);
  const double tilde = phi_normalization(E) * phi_normalization(E);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      exact(i, j) = exact(j, i) = tilde * exact_cov_chains(chains[i], chains[j], E);
  const auto cmp = covariance_matrix_experiment(out.rows, sigma.sigma,
                                                Eigen::MatrixXd::Constant(n, n, cfg.band),
                                                cfg.se_mult);
  out.report["covariance"] = cmp.to_json();
  out.report["exact_finite_E"] = to_json(exact);
  Checks checks;
  checks.add("covariance_within_band", cmp.pass);
  finish(out, checks);
  return out;
}

ExperimentOutput run_disorder(const ExperimentConfig& cfg) {
  const auto chains = cfg.chain_list();
  const DisorderSigma s = disorder_sigma(chains);
  ExperimentOutput out;
  out.report["sigma"] = to_json(s.sigma);
  out.report["min_eigenvalue"] = s.min_eigenvalue;
  out.report["psd"] = s.psd;
  Checks checks;
  checks.add("sigma_psd", s.psd, {{"min_eigenvalue", s.min_eigenvalue}});
  finish(out, checks);
  return out;
}

ExperimentOutput run_cov_table(const ExperimentConfig& cfg) {
  std::vector<CovTableRow> rows;
  const double l1 = cfg.lambdas.size() > 0 ? cfg.lambdas[0] : 1.0;
  const double l2 = cfg.lambdas.size() > 1 ? cfg.lambdas[1] : l1;
  for (double E : cfg.energies)
    for (double th : cfg.thetas)
      for (double gap : cfg.gaps) rows.push_back(cov_table_row(E, l1, l2, th, gap));
  ExperimentOutput out;
  std::ostringstream os;
  write_covtable_csv(os, rows);
  out.extra_csv_name = "covtable.csv";
  out.extra_csv = os.str();
  out.report["rows"] = rows.size();
  Checks checks;
  finish(out, checks);
  return out;
}

ExperimentOutput run_sup_discretized(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  Checks checks;
  nlohmann::json per_energy = nlohmann::json::array();
  std::vector<double> worst;
  std::vector<Eigen::MatrixXd> blocks;
  int K0 = -1;
  for (std::size_t e = 0; e < cfg.energies.size(); ++e) {
    const double E = cfg.energies[e];
    const int M = waves_for(cfg, E);
    const int K = level_for(cfg, E);
    if (K0 < 0) K0 = K;
    if (K != K0) throw ConfigError("sup-discretized needs one K across energies");
    const int n = 1 << K;
    const std::uint64_t seed = cfg.energies.size() == 1 ? cfg.seed : energy_seed(cfg.seed, e);
    // Boundary values: top edge raw(k, n) then right edge raw(n, k).
    const Eigen::MatrixXd raw = run_replications(
        cfg.n_reps, 2 * (n + 1), resolve_threads(cfg.threads), [&](std::uint64_t r) {
          const auto f = PlaneWaveField::sample(E, M, seed, r);
          const auto g = partition_function(f, K, cfg.ppw);
          std::vector<double> row;
          for (int k = 0; k <= n; ++k) row.push_back(g.raw(k, n));
          for (int k = 0; k <= n; ++k) row.push_back(g.raw(n, k));
          return row;
        });
    Eigen::RowVectorXd centre(2 * (n + 1));
    if (cfg.mean_density == "theoretical") {
      const double rho = theoretical_mean_density(E);
      for (int k = 0; k <= n; ++k) {
        centre[k] = rho * (static_cast<double>(k) / n);
        centre[n + 1 + k] = rho * (static_cast<double>(k) / n);
      }
    } else {
      centre = raw.colwise().mean();
    }
    const double factor = nodal_normalization(E);
    std::vector<double> sups(cfg.n_reps);
    for (Eigen::Index r = 0; r < raw.rows(); ++r)
      sups[static_cast<std::size_t>(r)] = ((raw.row(r) - centre) * factor).cwiseAbs().maxCoeff();
    nlohmann::json cdf = nlohmann::json::array();
    double max_err = 0.0;
    for (double z : cfg.z) {
      const double emp =
          static_cast<double>(std::count_if(sups.begin(), sups.end(), [z](double s) { return s <= z; })) /
          static_cast<double>(sups.size());
      const double th = boundary_sup_cdf(z);
      max_err = std::max(max_err, std::abs(emp - th));
      cdf.push_back({{"z", z}, {"empirical", emp}, {"formula", th}, {"error", emp - th}});
    }
    worst.push_back(max_err);
    double mean_sup = 0.0;
    for (double s : sups) mean_sup += s;
    mean_sup /= static_cast<double>(sups.size());
    per_energy.push_back({{"E", E}, {"K", K}, {"n_waves", M}, {"mean_sup", mean_sup},
                          {"cdf", cdf}, {"max_abs_error", max_err}});
    Eigen::MatrixXd block(raw.rows(), raw.cols() + 1);
    block.col(0).setConstant(E);
    block.rightCols(raw.cols()) = raw;
    blocks.push_back(std::move(block));
    if (e + 1 == cfg.energies.size())
      checks.add("cdf_within_band", max_err <= cfg.band, {{"E", E}, {"max_abs_error", max_err}});
  }
  if (worst.size() >= 2)
    checks.add("error_decreases_with_E", worst.back() <= worst.front(),
               {{"first", worst.front()}, {"last", worst.back()}});
  const int n = 1 << K0;
  out.columns = {"E"};
  for (int k = 0; k <= n; ++k) out.columns.push_back("top" + std::to_string(k));
  for (int k = 0; k <= n; ++k) out.columns.push_back("right" + std::to_string(k));
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.rows();
  out.rows.resize(total, static_cast<Eigen::Index>(out.columns.size()));
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.rows.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  out.report["energies"] = per_energy;
  out.report["mean_density"] = cfg.mean_density;
  finish(out, checks);
  return out;
}

ExperimentOutput run_whitenoise(const ExperimentConfig& cfg) {
  const double E = cfg.energies.front();
  const int M = waves_for(cfg, E);
  const auto nb = static_cast<Eigen::Index>(cfg.bumps.size());
  ExperimentOutput out;
  out.columns = numbered("pair", cfg.bumps.size());
  out.rows = run_replications(cfg.n_reps, static_cast<int>(nb), resolve_threads(cfg.threads),
                              [&](std::uint64_t r) {
                                const auto f = PlaneWaveField::sample(E, M, cfg.seed, r);
                                const NodalSet ns = extract_nodal(f, RectDomain::unit(), cfg.ppw);
                                std::vector<double> row;
                                for (const auto& b : cfg.bumps)
                                  row.push_back(pair_with_test_function(ns, b, E));
                                return row;
                              });
  out.summary = summarize(out.rows, out.columns);
  Eigen::MatrixXd target(nb, nb);
  Eigen::MatrixXd band(nb, nb);
  for (Eigen::Index i = 0; i < nb; ++i)
    for (Eigen::Index j = 0; j < nb; ++j) target(i, j) = whitenoise_cov(cfg.bumps[i], cfg.bumps[j]);
  for (Eigen::Index i = 0; i < nb; ++i)
    for (Eigen::Index j = 0; j < nb; ++j)
      band(i, j) = cfg.band * std::sqrt(target(i, i) * target(j, j));
  const auto cmp = covariance_matrix_experiment(out.rows, target, band, cfg.se_mult);
  out.report["covariance"] = cmp.to_json();
  Checks checks;
  checks.add("covariance_within_band", cmp.pass);
  finish(out, checks);
  return out;
}

ExperimentOutput run_sup_moment(const ExperimentConfig& cfg) {
  const SupMomentReport rep = sup_moment_scan(cfg.energies, cfg.n_waves, cfg.ppw, cfg.n_reps,
                                              cfg.seed, resolve_threads(cfg.threads));
  ExperimentOutput out;
  out.columns = {"E", "sup"};
  out.rows = rep.rows;
  out.report = rep.to_json();
  Checks checks;
  checks.add("fit_r2", rep.fit.r2 >= 0.98, {{"r2", rep.fit.r2}});
  checks.add("increasing", rep.increasing);
  finish(out, checks);
  return out;
}

std::vector<double> doubles(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>()};
  return j.get<std::vector<double>>();
}

}  // namespace

int resolve_threads(int requested) {
  if (const char* env = std::getenv("THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

Eigen::MatrixXd run_replications(std::size_t n, int columns, int threads,
                                 const std::function<std::vector<double>(std::uint64_t)>& fn) {
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(n), columns);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= n) return;
      try {
        const std::vector<double> row = fn(r);
        if (static_cast<int>(row.size()) != columns)
          throw ConfigError("replication returned the wrong number of columns");
        for (int c = 0; c < columns; ++c) rows(static_cast<Eigen::Index>(r), c) = row[c];
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const int t = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::size_t>(n, 1))));
  if (t == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return rows;
}

std::uint64_t energy_seed(std::uint64_t seed, std::size_t i) {
  return seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(i + 1);
}

std::string to_string(ExperimentKind k) {
  for (const auto& kn : kKinds)
    if (kn.kind == k) return kn.name;
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& s) {
  for (const auto& kn : kKinds)
    if (s == kn.name) return kn.kind;
  throw ConfigError("unknown experiment '" + s + "'");
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  const nlohmann::json unit_segment = {{"segments", {{{"p", {0, 0}}, {"theta", 0}, {"len", 1}}}},
                                       {"closed", false}};
  const nlohmann::json two_boxes = {{{"rect", {1, 1}}}, {{"rect", {0.5, 1}}}};
  switch (kind) {
    case ExperimentKind::nodal_length:
      c.energies = {100};
      c.n_reps = 500;
      c.rects = {RectDomain::unit()};
      break;
    case ExperimentKind::variance_scan:
      c.energies = {1000};
      c.n_reps = 2000;
      c.rects = {RectDomain::unit(), RectDomain::anchored(0.5, 0.5)};
      break;
    case ExperimentKind::sheet_cov:
      c.energies = {4096};
      c.n_reps = 2000;
      c.points = {{0.5, 0.5}, {0.25, 0.75}, {0.75, 0.75}};
      c.band = 0.1;
      c.se_mult = 0.0;
      break;
    case ExperimentKind::chaos2_var:
      c.energies = {500};
      c.n_reps = 2000;
      c.chains = nlohmann::json::array({unit_segment});
      break;
    case ExperimentKind::chaos2_cov:
      c.energies = {10000};
      c.n_reps = 2000;
      c.chains = two_boxes;
      c.band = 0.3;
      c.se_mult = 0.0;
      break;
    case ExperimentKind::disorder:
      c.chains = two_boxes;
      break;
    case ExperimentKind::cov_table:
      c.energies = {100, 1000, 10000};
      c.thetas = {kPi / 2, kPi / 4, 0.0};
      c.gaps = {0.0};
      c.lambdas = {1.0, 1.0};
      break;
    case ExperimentKind::sup_discretized:
      c.energies = {4096};
      c.n_reps = 2000;
      c.z = {0.5, 1.0, 1.5};
      c.band = 0.1;
      break;
    case ExperimentKind::whitenoise:
      c.energies = {4096};
      c.n_reps = 2000;
      c.bumps = {TensorBump({0.1, 0.1, 0.45, 0.45}), TensorBump({0.55, 0.55, 0.9, 0.9}),
                 TensorBump({0.3, 0.3, 0.7, 0.7})};
      c.band = 0.15;
      c.se_mult = 0.0;
      break;
    case ExperimentKind::sup_moment:
      c.energies = {1e2, 1e3, 1e4, 1e5};
      c.n_reps = 200;
      break;
  }
  return c;
}

void ExperimentConfig::merge_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("experiment") && parse_experiment_kind(j["experiment"]) != kind)
      throw ConfigError("config is for experiment '" + j["experiment"].get<std::string>() + "'");
    if (j.contains("E")) energies = doubles(j["E"]);
    if (j.contains("M")) n_waves = j["M"];
    if (j.contains("ppw")) ppw = j["ppw"];
    if (j.contains("K")) K = j["K"];
    if (j.contains("n")) n_reps = j["n"];
    if (j.contains("seed")) seed = j["seed"];
    if (j.contains("threads")) threads = j["threads"];
    if (j.contains("chains")) chains = j["chains"];
    if (j.contains("rects")) {
      rects.clear();
      for (const auto& r : j["rects"]) rects.push_back(rect_from_json(r));
    }
    if (j.contains("points")) {
      points.clear();
      for (const auto& p : j["points"]) points.push_back({p.at(0), p.at(1)});
    }
    if (j.contains("bumps")) {
      bumps.clear();
      for (const auto& b : j["bumps"])
        bumps.emplace_back(rect_from_json(b.at("support")), b.value("amplitude", 1.0));
    }
    if (j.contains("z")) z = doubles(j["z"]);
    if (j.contains("thetas")) thetas = doubles(j["thetas"]);
    if (j.contains("gaps")) gaps = doubles(j["gaps"]);
    if (j.contains("lambdas")) lambdas = doubles(j["lambdas"]);
    if (j.contains("mean_density")) mean_density = j["mean_density"];
    if (j.contains("band")) band = j["band"];
    if (j.contains("se_mult")) se_mult = j["se_mult"];
    if (j.contains("out")) out_dir = j["out"];
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json r = nlohmann::json::array();
  for (const auto& d : rects) r.push_back(rect_json(d));
  nlohmann::json p = nlohmann::json::array();
  for (const auto& v : points) p.push_back({v.x, v.y});
  nlohmann::json b = nlohmann::json::array();
  for (const auto& f : bumps) b.push_back({{"support", rect_json(f.support())}, {"amplitude", f.amplitude()}});
  nlohmann::json waves = nlohmann::json::array();
  nlohmann::json levels = nlohmann::json::array();
  for (double E : energies) {
    waves.push_back(n_waves > 0 ? n_waves : default_n_waves(E));
    levels.push_back(K > 0 ? K : (E > 1.0 ? default_partition_level(E) : 0));
  }
  return {{"experiment", to_string(kind)},
          {"E", energies},
          {"M", n_waves},
          {"M_resolved", waves},
          {"ppw", ppw},
          {"K", K},
          {"K_resolved", levels},
          {"n", n_reps},
          {"seed", seed},
          {"threads", threads},
          {"chains", chains},
          {"rects", r},
          {"points", p},
          {"bumps", b},
          {"z", z},
          {"thetas", thetas},
          {"gaps", gaps},
          {"lambdas", lambdas},
          {"mean_density", mean_density},
          {"band", band},
          {"se_mult", se_mult},
          {"out", out_dir},
          {"boundary_orientation", "clockwise"}};
}

std::vector<PolygonalChain> ExperimentConfig::chain_list() const {
  std::vector<PolygonalChain> v;
  for (const auto& c : chains) v.push_back(chain_from_json(c));
  return v;
}

void ExperimentConfig::validate() const {
  const bool needs_reps = kind != ExperimentKind::disorder && kind != ExperimentKind::cov_table;
  if (needs_reps && n_reps < 2) throw ConfigError("n must be at least 2");
  if (needs_reps || kind == ExperimentKind::cov_table) {
    if (energies.empty()) throw ConfigError("at least one energy E is required");
    for (double E : energies)
      if (!(E > 0.0) || !std::isfinite(E)) throw ConfigError("energies must be positive");
  }
  if (ppw < 4) throw ConfigError("ppw must be at least 4");
  if (n_waves != 0 && n_waves < 2) throw ConfigError("M must be at least 2");
  if (K < 0 || K > 12) throw ConfigError("K must be in [1, 12] (0 for the default)");
  if (mean_density != "empirical" && mean_density != "theoretical")
    throw ConfigError("mean_density must be 'empirical' or 'theoretical'");
  const bool nodal = kind == ExperimentKind::nodal_length || kind == ExperimentKind::variance_scan ||
                     kind == ExperimentKind::sheet_cov || kind == ExperimentKind::sup_discretized ||
                     kind == ExperimentKind::whitenoise;
  if (nodal)
    for (double E : energies)
      if (E < 10.0) throw ConfigError("nodal experiments need E >= 10");
  for (const auto& r : rects) {
    if (r.degenerate()) throw ConfigError("degenerate rectangle in config");
    if (!RectDomain::unit().contains(r)) throw ConfigError("rectangles must lie in [0,1]^2");
  }
  for (const auto& p : points)
    if (!(p.x >= 0 && p.x <= 1 && p.y >= 0 && p.y <= 1))
      throw ConfigError("points must lie in [0,1]^2");
  for (const auto& b : bumps)
    if (!RectDomain::unit().contains(b.support()))
      throw ConfigError("bump supports must lie in [0,1]^2");
  switch (kind) {
    case ExperimentKind::nodal_length:
    case ExperimentKind::variance_scan:
      if (rects.empty()) throw ConfigError("rects must not be empty");
      break;
    case ExperimentKind::sheet_cov:
      if (points.size() < 2) throw ConfigError("sheet-cov needs at least two points");
      break;
    case ExperimentKind::chaos2_var:
    case ExperimentKind::disorder:
      if (chains.empty()) throw ConfigError("chains must not be empty");
      chain_list();
      break;
    case ExperimentKind::chaos2_cov:
      if (chains.size() < 2) throw ConfigError("chaos2-cov needs at least two chains");
      chain_list();
      break;
    case ExperimentKind::cov_table:
      if (thetas.empty() || gaps.empty()) throw ConfigError("cov-table needs thetas and gaps");
      break;
    case ExperimentKind::sup_discretized:
      if (z.empty()) throw ConfigError("sup-discretized needs z values");
      for (double v : z)
        if (v < 0) throw ConfigError("z values must be nonnegative");
      break;
    case ExperimentKind::whitenoise:
      if (bumps.size() < 2) throw ConfigError("whitenoise needs at least two bumps");
      break;
    case ExperimentKind::sup_moment:
      if (energies.size() < 4) throw ConfigError("sup-moment needs at least 4 energies");
      if (!std::is_sorted(energies.begin(), energies.end()))
        throw ConfigError("sup-moment energies must be sorted");
      for (double E : energies)
        if (!(E > 1.0)) throw ConfigError("sup-moment energies must exceed 1");
      break;
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.contains("experiment")) throw ConfigError("config needs an 'experiment' field");
  ExperimentConfig c = ExperimentConfig::defaults(parse_experiment_kind(j["experiment"]));
  c.merge_json(j);
  return c;
}

nlohmann::json experiment_plan(const ExperimentConfig& cfg) {
  nlohmann::json plan = {{"config", cfg.to_json()}, {"threads_resolved", resolve_threads(cfg.threads)}};
  nlohmann::json grids = nlohmann::json::array();
  for (double E : cfg.energies) {
    if (!(E > 0)) continue;
    const GridSpec g = make_grid(RectDomain::unit(), E, cfg.ppw);
    grids.push_back({{"E", E}, {"nodal_cells_per_side", g.nx}});
  }
  plan["grids"] = grids;
  return plan;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentOutput out;
  switch (cfg.kind) {
    case ExperimentKind::nodal_length: out = run_nodal_length(cfg); break;
    case ExperimentKind::variance_scan: out = run_variance_scan(cfg); break;
    case ExperimentKind::sheet_cov: out = run_sheet_cov(cfg); break;
    case ExperimentKind::chaos2_var: out = run_chaos2_var(cfg); break;
    case ExperimentKind::chaos2_cov: out = run_chaos2_cov(cfg); break;
    case ExperimentKind::disorder: out = run_disorder(cfg); break;
    case ExperimentKind::cov_table: out = run_cov_table(cfg); break;
    case ExperimentKind::sup_discretized: out = run_sup_discretized(cfg); break;
    case ExperimentKind::whitenoise: out = run_whitenoise(cfg); break;
    case ExperimentKind::sup_moment: out = run_sup_moment(cfg); break;
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void write_raw_csv(std::ostream& os, const ExperimentOutput& out) {
  os << "# schema_version=1\n";
  os << "rep";
  for (const auto& c : out.columns) os << ',' << c;
  os << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < out.rows.rows(); ++r) {
    os << r;
    for (Eigen::Index c = 0; c < out.rows.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", out.rows(r, c));
      os << ',' << buf;
    }
    os << '\n';
  }
}

nlohmann::json summary_json(const ExperimentConfig& cfg, const ExperimentOutput& out) {
  nlohmann::json j = {{"schema_version", 1},
                      {"config", cfg.to_json()},
                      {"seed", cfg.seed},
                      {"git_describe", git_describe()},
                      {"wall_clock_seconds", out.wall_seconds},
                      {"threads_resolved", resolve_threads(cfg.threads)},
                      {"pass", out.pass},
                      {"report", out.report}};
  if (out.summary) j["summary"] = out.summary->to_json();
  return j;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentOutput& out) {
  const std::filesystem::path dir = cfg.out_dir.empty() ? "." : cfg.out_dir;
  std::filesystem::create_directories(dir);
  if (out.rows.size() > 0) {
    std::ofstream raw(dir / "raw.csv");
    write_raw_csv(raw, out);
  }
  if (!out.extra_csv_name.empty()) {
    std::ofstream extra(dir / out.extra_csv_name);
    extra << out.extra_csv;
  }
  std::ofstream summary(dir / "summary.json");
  summary << summary_json(cfg, out).dump(2) << '\n';
  if (!summary) throw ResourceError("failed to write " + (dir / "summary.json").string());
}

std::string git_describe() { return BERRY_GIT_DESCRIBE; }

nlohmann::json CovarianceComparison::to_json() const {
  return {{"empirical", berry::to_json(empirical)}, {"target", berry::to_json(target)},
          {"se", berry::to_json(se)},               {"tolerance", berry::to_json(tolerance)},
          {"z", berry::to_json(z)},                 {"pass", pass}};
}

CovarianceComparison covariance_matrix_experiment(const Eigen::MatrixXd& samples,
                                                  const Eigen::MatrixXd& target,
                                                  const Eigen::MatrixXd& band, double se_mult) {
  if (samples.cols() != target.cols() || target.rows() != target.cols())
    throw ConfigError("covariance target has the wrong shape");
  if (samples.cols() < 2) throw ConfigError("covariance experiment needs at least two targets");
  const StatSummary s = summarize(samples);
  CovarianceComparison c;
  c.empirical = s.covariance;
  c.target = target;
  c.se = covariance_se(s.covariance, s.n);
  c.tolerance = se_mult * c.se + band;
  c.z = (c.empirical - c.target).cwiseQuotient(c.se);
  c.pass = ((c.empirical - c.target).cwiseAbs().array() <= c.tolerance.array()).all();
  return c;
}

nlohmann::json SupMomentReport::to_json() const {
  return {{"E", energies},        {"mean_sup", mean_sup},      {"se", se},
          {"slope", fit.slope},   {"intercept", fit.intercept}, {"r2", fit.r2},
          {"increasing", increasing}};
}

SupMomentReport sup_moment_scan(const std::vector<double>& energies, int n_waves, int ppw,
                                std::size_t n_reps, std::uint64_t seed, int threads) {
  if (energies.size() < 4) throw ConfigError("sup_moment_scan needs at least 4 energies");
  if (n_reps < 2) throw ConfigError("sup_moment_scan needs n >= 2");
  SupMomentReport rep;
  rep.energies = energies;
  rep.rows.resize(static_cast<Eigen::Index>(energies.size() * n_reps), 2);
  std::vector<double> x;
  for (std::size_t e = 0; e < energies.size(); ++e) {
    const double E = energies[e];
    const int M = n_waves > 0 ? n_waves : default_n_waves(E);
    const std::uint64_t s = energy_seed(seed, e);
    const Eigen::MatrixXd sups = run_replications(n_reps, 1, threads, [&](std::uint64_t r) {
      const auto f = PlaneWaveField::sample(E, M, s, r);
      return std::vector<double>{field_sup(f, RectDomain::unit(), ppw).value};
    });
    const double mean = sups.mean();
    const double var = (sups.array() - mean).square().sum() / static_cast<double>(n_reps - 1);
    rep.mean_sup.push_back(mean);
    rep.se.push_back(std::sqrt(var / static_cast<double>(n_reps)));
    x.push_back(std::sqrt(std::log(E)));
    const auto off = static_cast<Eigen::Index>(e * n_reps);
    rep.rows.block(off, 0, static_cast<Eigen::Index>(n_reps), 1).setConstant(E);
    rep.rows.block(off, 1, static_cast<Eigen::Index>(n_reps), 1) = sups;
  }
  rep.fit = fit_line(x, rep.mean_sup);
  rep.increasing = std::is_sorted(rep.mean_sup.begin(), rep.mean_sup.end(),
                                  [](double a, double b) { return a <= b; }) &&
                   std::adjacent_find(rep.mean_sup.begin(), rep.mean_sup.end(),
                                      [](double a, double b) { return b <= a; }) ==
                       rep.mean_sup.end();
  return rep;
}

}  // namespace berry
