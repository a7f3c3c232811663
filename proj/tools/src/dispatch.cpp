#include "berry/cli/dispatch.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "berry/cli/selfcheck.hpp"
#include "berry/error.hpp"
#include "berry/montecarlo.hpp"

namespace berry::cli {
namespace {

struct Flags {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::vector<double> energies;
  std::optional<std::size_t> n_reps;
  std::optional<int> n_waves;
  std::optional<int> ppw;
  std::optional<int> K;
  bool dry_run = false;
};

void add_common_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file");
  sub->add_option("--out", f.out_dir, "Output directory");
  sub->add_option("--seed", f.seed, "Master seed");
  sub->add_option("--threads", f.threads, "Worker threads (THREADS env overrides)");
  sub->add_option("--E", f.energies, "Energy or energies")->delimiter(',');
  sub->add_option("--n", f.n_reps, "Number of replications");
  sub->add_option("--M", f.n_waves, "Number of plane waves (0 = default)");
  sub->add_option("--ppw", f.ppw, "Grid points per wavelength");
  sub->add_option("--K", f.K, "Dyadic partition level (0 = default)");
  sub->add_flag("--dry-run", f.dry_run, "Validate and print the resolved plan");
}

ExperimentConfig resolve(ExperimentKind kind, const Flags& f) {
  ExperimentConfig cfg = ExperimentConfig::defaults(kind);
  cfg.out_dir = "results/" + to_string(kind);
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw ConfigError("cannot open config file '" + f.config + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file '" + f.config + "' is not valid JSON: " + e.what());
    }
    cfg.merge_json(j);
  }
  if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
  if (f.seed) cfg.seed = *f.seed;
  if (f.threads) cfg.threads = *f.threads;
  if (!f.energies.empty()) cfg.energies = f.energies;
  if (f.n_reps) cfg.n_reps = *f.n_reps;
  if (f.n_waves) cfg.n_waves = *f.n_waves;
  if (f.ppw) cfg.ppw = *f.ppw;
  if (f.K) cfg.K = *f.K;
  cfg.validate();
  return cfg;
}

int print_checks(const std::vector<CheckLine>& lines, std::ostream& out) {
  bool ok = true;
  for (const auto& l : lines) {
    out << (l.pass ? "PASS " : "FAIL ") << l.name;
    if (!l.detail.empty()) out << "  (" << l.detail << ')';
    out << '\n';
    ok = ok && l.pass;
  }
  return ok ? exit_ok : exit_check_failed;
}

int run(ExperimentKind kind, const Flags& f, std::ostream& out) {
  const ExperimentConfig cfg = resolve(kind, f);
  if (f.dry_run) {
    out << experiment_plan(cfg).dump(2) << '\n';
    return exit_ok;
  }
  const ExperimentOutput result = run_experiment(cfg);
  write_outputs(cfg, result);
  if (kind == ExperimentKind::cov_table) out << result.extra_csv;
  for (const auto& c : result.report.value("checks", nlohmann::json::array())) {
    nlohmann::json detail = c;
    detail.erase("name");
    detail.erase("pass");
    out << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << "  "
        << detail.dump() << '\n';
  }
  out << "wrote " << cfg.out_dir << "/summary.json (" << result.wall_seconds << " s)\n";
  return result.pass ? exit_ok : exit_check_failed;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random plane wave nodal statistics lab", "berrylab"};
  app.require_subcommand(1);

  std::string suite;
  auto* selfcheck = app.add_subcommand("selfcheck", "Run an invariant suite");
  selfcheck->add_option("suite", suite, "special, field or geometry")
      ->required()
      ->check(CLI::IsMember({"special", "field", "geometry"}));

  Flags flags;
  std::vector<std::pair<CLI::App*, ExperimentKind>> experiments;
  const std::pair<ExperimentKind, const char*> kinds[] = {
      {ExperimentKind::nodal_length, "Mean nodal length"},
      {ExperimentKind::variance_scan, "Nodal length variance against area"},
      {ExperimentKind::sheet_cov, "Covariance of the cumulative length process"},
      {ExperimentKind::chaos2_var, "Second chaos variance against the exact oracle"},
      {ExperimentKind::chaos2_cov, "Second chaos covariance of boundary chains"},
      {ExperimentKind::disorder, "Limiting covariance matrix of chains"},
      {ExperimentKind::cov_table, "Tabulate exact and asymptotic covariances"},
      {ExperimentKind::sup_discretized, "Boundary supremum distribution"},
      {ExperimentKind::whitenoise, "Pairings with test functions"},
      {ExperimentKind::sup_moment, "Growth of the field supremum"},
  };
  for (const auto& [kind, help] : kinds) {
    auto* sub = app.add_subcommand(to_string(kind), help);
    add_common_flags(sub, flags);
    experiments.emplace_back(sub, kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return exit_config_error;
  }

  try {
    if (selfcheck->parsed()) {
      if (suite == "special") return print_checks(selfcheck_special(), out);
      if (suite == "field") return print_checks(selfcheck_field(), out);
      return print_checks(selfcheck_geometry(), out);
    }
    for (const auto& [sub, kind] : experiments)
      if (sub->parsed()) return run(kind, flags, out);
  } catch (const AccuracyError& e) {
    err << "error: " << e.what() << '\n';
    return exit_check_failed;
  } catch (const DiagnosticError& e) {
    err << "error: " << e.what() << '\n';
    return exit_check_failed;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_config_error;
  }
  err << app.help();
  return exit_config_error;
}

}  // namespace berry::cli
