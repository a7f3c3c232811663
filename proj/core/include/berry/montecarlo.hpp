#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "berry/geometry.hpp"
#include "berry/stats.hpp"
#include "berry/test_function.hpp"

namespace berry {

// Thread budget: the THREADS environment variable wins, then `requested`,
// then the hardware concurrency.
int resolve_threads(int requested);

// Row r of the result is fn(r). Replications run on a bounded pool; the
// output does not depend on the number of threads.
Eigen::MatrixXd run_replications(std::size_t n, int columns, int threads,
                                 const std::function<std::vector<double>(std::uint64_t)>& fn);

// Stream seed for the i-th energy of a multi-energy experiment.
std::uint64_t energy_seed(std::uint64_t seed, std::size_t energy_index);

enum class ExperimentKind {
  nodal_length,
  variance_scan,
  sheet_cov,
  chaos2_var,
  chaos2_cov,
  disorder,
  cov_table,
  sup_discretized,
  whitenoise,
  sup_moment,
};

std::string to_string(ExperimentKind k);
// Accepts the CLI spelling, e.g. "chaos2-var". Throws ConfigError.
ExperimentKind parse_experiment_kind(const std::string& s);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::nodal_length;
  std::vector<double> energies;
  int n_waves = 0;  // 0: default_n_waves(E)
  int ppw = 10;
  int K = 0;        // 0: default_partition_level(E)
  std::size_t n_reps = 0;
  std::uint64_t seed = 1;
  int threads = 0;
  nlohmann::json chains = nlohmann::json::array();  // chain literals
  std::vector<RectDomain> rects;
  std::vector<Vec2> points;
  std::vector<TensorBump> bumps;
  std::vector<double> z;
  std::vector<double> thetas;
  std::vector<double> gaps;
  std::vector<double> lambdas;  // lambda1, lambda2 for cov-table
  std::string mean_density = "empirical";  // or "theoretical"
  double band = 0.0;      // absolute (or relative, see kind) tolerance band
  double se_mult = 3.0;   // standard errors added to the band
  std::string out_dir;

  static ExperimentConfig defaults(ExperimentKind kind);
  // Overrides every field present in `j`. Throws ConfigError.
  void merge_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  // Throws ConfigError / GeometryError.
  void validate() const;
  std::vector<PolygonalChain> chain_list() const;
};

ExperimentConfig load_config(const std::string& path);

struct ExperimentOutput {
  std::vector<std::string> columns;
  Eigen::MatrixXd rows;  // one row per replication
  std::optional<StatSummary> summary;
  nlohmann::json report = nlohmann::json::object();
  std::string extra_csv_name;  // e.g. covtable.csv
  std::string extra_csv;
  bool pass = true;
  double wall_seconds = 0.0;
};

// Human-readable plan for --dry-run.
nlohmann::json experiment_plan(const ExperimentConfig& cfg);
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

void write_raw_csv(std::ostream& os, const ExperimentOutput& out);
nlohmann::json summary_json(const ExperimentConfig& cfg, const ExperimentOutput& out);
// raw.csv (+ extra CSV) and summary.json under cfg.out_dir.
void write_outputs(const ExperimentConfig& cfg, const ExperimentOutput& out);

std::string git_describe();

struct CovarianceComparison {
  Eigen::MatrixXd empirical;
  Eigen::MatrixXd target;
  Eigen::MatrixXd se;
  Eigen::MatrixXd tolerance;
  Eigen::MatrixXd z;
  bool pass = true;
  nlohmann::json to_json() const;
};

// Sample covariance of the columns of `samples` against `target`. Entry (i,j)
// passes when |emp - target| <= se_mult * se + band(i,j).
CovarianceComparison covariance_matrix_experiment(const Eigen::MatrixXd& samples,
                                                  const Eigen::MatrixXd& target,
                                                  const Eigen::MatrixXd& band, double se_mult);

struct SupMomentReport {
  std::vector<double> energies;
  std::vector<double> mean_sup;
  std::vector<double> se;
  LinearFit fit;  // mean_sup = intercept + slope sqrt(log E)
  bool increasing = false;
  Eigen::MatrixXd rows;  // (E, sup) per replication
  nlohmann::json to_json() const;
};

SupMomentReport sup_moment_scan(const std::vector<double>& energies, int n_waves, int ppw,
                                std::size_t n_reps, std::uint64_t seed, int threads);

}  // namespace berry
