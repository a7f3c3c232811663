#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "berry/error.hpp"
#include "berry/field.hpp"
#include "berry/montecarlo.hpp"
#include "berry/rng.hpp"

using namespace berry;

namespace {

std::string raw_csv(const ExperimentOutput& o) {
  std::ostringstream os;
  write_raw_csv(os, o);
  return os.str();
}

ExperimentConfig small(ExperimentKind k, int threads) {
  ExperimentConfig c = ExperimentConfig::defaults(k);
  c.threads = threads;
  c.n_reps = 6;
  switch (k) {
    case ExperimentKind::nodal_length:
    case ExperimentKind::variance_scan:
      c.energies = {50};
      break;
    case ExperimentKind::sheet_cov:
    case ExperimentKind::whitenoise:
      c.energies = {100};
      break;
    case ExperimentKind::sup_discretized:
      c.energies = {100, 200};
      c.K = 2;
      break;
    case ExperimentKind::chaos2_var:
    case ExperimentKind::chaos2_cov:
      c.energies = {100};
      break;
    case ExperimentKind::sup_moment:
      c.energies = {20, 40, 80, 160};
      break;
    default:
      break;
  }
  return c;
}

}  // namespace

TEST(Engine, RowsInReplicationOrder) {
  const auto m = run_replications(50, 2, 4, [](std::uint64_t r) {
    return std::vector<double>{double(r), double(r * r)};
  });
  for (int r = 0; r < 50; ++r) {
    EXPECT_EQ(m(r, 0), r);
    EXPECT_EQ(m(r, 1), r * r);
  }
}

TEST(Engine, PropagatesErrors) {
  auto bad = [](std::uint64_t r) -> std::vector<double> {
    if (r == 7) throw ResourceError("boom");
    return {0.0};
  };
  EXPECT_THROW(run_replications(20, 1, 3, bad), ResourceError);
  EXPECT_THROW(run_replications(3, 2, 1, [](std::uint64_t) { return std::vector<double>{1.0}; }),
               ConfigError);
}

TEST(Engine, ThreadsEnvironmentOverride) {
  ::setenv("THREADS", "3", 1);
  EXPECT_EQ(resolve_threads(8), 3);
  ::unsetenv("THREADS");
  EXPECT_EQ(resolve_threads(5), 5);
  EXPECT_GE(resolve_threads(0), 1);
}

TEST(Engine, EnergySeedsAreDistinct) {
  EXPECT_NE(energy_seed(1, 0), energy_seed(1, 1));
  EXPECT_NE(energy_seed(1, 0), energy_seed(2, 0));
}

TEST(Config, KindNames) {
  for (auto k : {ExperimentKind::nodal_length, ExperimentKind::variance_scan, ExperimentKind::sheet_cov,
                 ExperimentKind::chaos2_var, ExperimentKind::chaos2_cov, ExperimentKind::disorder,
                 ExperimentKind::cov_table, ExperimentKind::sup_discretized, ExperimentKind::whitenoise,
                 ExperimentKind::sup_moment})
    EXPECT_EQ(parse_experiment_kind(to_string(k)), k);
  EXPECT_THROW(parse_experiment_kind("nope"), ConfigError);
}

TEST(Config, MergeAndValidate) {
  auto c = ExperimentConfig::defaults(ExperimentKind::chaos2_var);
  c.merge_json(nlohmann::json::parse(R"({"E": 300, "n": 10, "seed": 9, "chains": [{"rect": [0.5, 0.5]}]})"));
  EXPECT_EQ(c.energies, std::vector<double>{300});
  EXPECT_EQ(c.n_reps, 10u);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.chain_list().size(), 1u);
  c.validate();
  const auto j = c.to_json();
  EXPECT_EQ(j["experiment"], "chaos2-var");
  EXPECT_EQ(j["M_resolved"][0], default_n_waves(300));

  auto bad = c;
  bad.n_reps = 1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.ppw = 2;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.chains = nlohmann::json::parse(R"([{"rect":[0, 1]}])");
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW(c.merge_json(nlohmann::json::parse(R"({"experiment": "disorder"})")), ConfigError);
  EXPECT_THROW(c.merge_json(nlohmann::json::parse(R"({"n": "many"})")), ConfigError);

  auto sm = ExperimentConfig::defaults(ExperimentKind::sup_moment);
  sm.energies = {100};
  EXPECT_THROW(sm.validate(), ConfigError);
  auto nl = ExperimentConfig::defaults(ExperimentKind::nodal_length);
  nl.rects = {{0, 0, 1.5, 1}};
  EXPECT_THROW(nl.validate(), ConfigError);
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "berry_cfg_test.json";
  std::ofstream(path) << R"({"experiment": "nodal-length", "E": [120], "n": 4, "rects": [[0.5, 0.5]]})";
  const auto c = load_config(path.string());
  EXPECT_EQ(c.kind, ExperimentKind::nodal_length);
  EXPECT_EQ(c.rects.size(), 1u);
  EXPECT_DOUBLE_EQ(c.rects[0].x1, 0.5);
  EXPECT_THROW(load_config("/nonexistent/berry.json"), ConfigError);
  std::ofstream(path) << "{not json";
  EXPECT_THROW(load_config(path.string()), ConfigError);
  std::filesystem::remove(path);
}

namespace berry {
void PrintTo(ExperimentKind k, std::ostream* os) { *os << to_string(k); }
}  // namespace berry

class EveryKind : public ::testing::TestWithParam<ExperimentKind> {};

TEST_P(EveryKind, DeterministicAcrossThreadsAndRuns) {
  const auto a = run_experiment(small(GetParam(), 1));
  const auto b = run_experiment(small(GetParam(), 4));
  const auto c = run_experiment(small(GetParam(), 4));
  EXPECT_EQ(raw_csv(a), raw_csv(b));
  EXPECT_EQ(raw_csv(b), raw_csv(c));
  if (a.summary) {
    EXPECT_EQ(a.summary->n, 6u);
  }
  EXPECT_EQ(a.report.dump(), b.report.dump());
}

INSTANTIATE_TEST_SUITE_P(Kinds, EveryKind,
                         ::testing::Values(ExperimentKind::nodal_length, ExperimentKind::variance_scan,
                                           ExperimentKind::sheet_cov, ExperimentKind::chaos2_var,
                                           ExperimentKind::chaos2_cov, ExperimentKind::sup_discretized,
                                           ExperimentKind::whitenoise, ExperimentKind::sup_moment),
                         [](const auto& info) {
                           std::string n = to_string(info.param);
                           std::replace(n.begin(), n.end(), '-', '_');
                           return n;
                         });

TEST(Outputs, TwoReplicationsGiveTwoRows) {
  auto c = small(ExperimentKind::nodal_length, 1);
  c.n_reps = 2;
  c.out_dir = (std::filesystem::temp_directory_path() / "berry_out_test").string();
  const auto o = run_experiment(c);
  EXPECT_EQ(o.summary->n, 2u);
  write_outputs(c, o);
  std::ifstream raw(std::filesystem::path(c.out_dir) / "raw.csv");
  std::string line;
  int rows = 0;
  std::getline(raw, line);
  EXPECT_EQ(line, "# schema_version=1");
  std::getline(raw, line);
  while (std::getline(raw, line)) ++rows;
  EXPECT_EQ(rows, 2);
  std::ifstream sj(std::filesystem::path(c.out_dir) / "summary.json");
  const auto j = nlohmann::json::parse(sj);
  EXPECT_EQ(j["config"]["experiment"], "nodal-length");
  EXPECT_TRUE(j.contains("git_describe"));
  EXPECT_TRUE(j.contains("wall_clock_seconds"));
  EXPECT_EQ(j["summary"]["n"], 2);
  std::filesystem::remove_all(c.out_dir);
}

TEST(Outputs, CovTableWritesCsv) {
  auto c = ExperimentConfig::defaults(ExperimentKind::cov_table);
  c.energies = {100};
  const auto o = run_experiment(c);
  EXPECT_EQ(o.extra_csv_name, "covtable.csv");
  EXPECT_NE(o.extra_csv.find("E,lambda1,lambda2,theta,gap"), std::string::npos);
}

TEST(CovarianceComparison, TargetsAndTolerance) {
  CounterRng r(1, 0);
  Eigen::MatrixXd x(4000, 2);
  for (int i = 0; i < 4000; ++i) {
    const double a = r.normal(), b = r.normal();
    x(i, 0) = a;
    x(i, 1) = 0.5 * a + b;
  }
  Eigen::MatrixXd target(2, 2);
  target << 1, 0.5, 0.5, 1.25;
  const auto c = covariance_matrix_experiment(x, target, Eigen::MatrixXd::Zero(2, 2), 3.0);
  EXPECT_TRUE(c.pass);
  target(0, 1) = target(1, 0) = 0.9;
  EXPECT_FALSE(covariance_matrix_experiment(x, target, Eigen::MatrixXd::Zero(2, 2), 3.0).pass);
  EXPECT_THROW(covariance_matrix_experiment(x.leftCols(1), target.topLeftCorner(1, 1),
                                            Eigen::MatrixXd::Zero(1, 1), 3.0),
               ConfigError);
}

TEST(SupMoment, NeedsFourEnergies) {
  EXPECT_THROW(sup_moment_scan({100}, 0, 10, 10, 1, 1), ConfigError);
}
