#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "mppivs/harness.hpp"
#include "mppivs/io.hpp"
#include "mppivs/oracles.hpp"

namespace {

namespace fs = std::filesystem;
using namespace mppivs;

std::optional<std::uint64_t> env_seed() {
  if (const char* raw = std::getenv("MPPIVS_SEED")) {
    try {
      return std::stoull(raw);
    } catch (const std::exception&) {
      throw ConfigError("MPPIVS_SEED is not a valid integer");
    }
  }
  return std::nullopt;
}

void apply_seed(std::uint64_t& seed, const std::optional<std::uint64_t>& flag) {
  if (flag) {
    seed = *flag;
  } else if (auto env = env_seed()) {
    seed = *env;
  }
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::optional<std::uint64_t>& seed_flag, int parallel) {
  ScenarioConfig cfg = scenario_from_file(config_path);
  apply_seed(cfg.seed, seed_flag);
  cfg.mppi.threads = std::max(1, parallel);

  fs::create_directories(out_dir);
  const TaskResult result = run_task(cfg);
  const fs::path base = fs::path(out_dir) / cfg.name;
  write_trajectory_csv(base.string() + ".csv", result.log);
  write_result_json(base.string() + ".json", cfg.name, result);

  std::printf("%s: success=%d r_lm=%d r_jl=%d p_out=%d", cfg.name.c_str(),
              result.success, result.r_lm, result.r_jl, result.p_out);
  if (result.convergence_time) {
    std::printf(" convergence=%.2fs", *result.convergence_time);
  }
  std::printf("\n");
  return result.success ? 0 : 2;
}

int cmd_suite(const std::string& test_name, const std::string& config_path,
              const std::string& out_dir,
              const std::optional<std::uint64_t>& seed_flag,
              std::optional<int> tasks, int parallel) {
  std::string path = config_path;
  if (!test_name.empty()) path = preset_path(test_name);
  SuiteConfig suite = suite_from_file(path);
  apply_seed(suite.scenario.seed, seed_flag);
  if (tasks) suite.tasks = *tasks;
  if (suite.tasks < 1) throw ConfigError("tasks must be >= 1");

  fs::create_directories(out_dir);
  std::vector<TaskResult> results;
  const SuiteSummary summary = run_suite(suite, std::max(1, parallel), &results);

  const std::string name = test_name.empty() ? suite.scenario.name : test_name;
  write_summary_json((fs::path(out_dir) / "summary.json").string(), name,
                     summary, results);
  for (std::size_t i = 0; i < results.size(); ++i) {
    char file[64];
    std::snprintf(file, sizeof(file), "task_%03zu.csv", i);
    write_trajectory_csv((fs::path(out_dir) / file).string(), results[i].log);
  }

  std::printf(
      "%s: tasks=%d success=%d (%.2f%%) r_lm=%d p_out=%d r_jl=%d\n",
      name.c_str(), summary.tasks, summary.n_success, summary.success_rate,
      summary.r_lm, summary.p_out, summary.r_jl);
  return 0;
}

int cmd_oracle(const std::string& name) {
  OracleReport report;
  if (name == "finite-diff") {
    report = oracle_finite_difference();
  } else if (name == "pinv-axioms") {
    report = oracle_pinv_axioms();
  } else if (name == "mppi-toy") {
    report = oracle_mppi_toy();
  } else if (name == "depth-integration") {
    report = oracle_depth_integration();
  } else if (name == "rotation-roundtrip") {
    report = oracle_rotation_round_trip();
  } else {
    std::fprintf(stderr,
                 "unknown oracle '%s'; available: finite-diff, pinv-axioms, "
                 "mppi-toy, depth-integration, rotation-roundtrip\n",
                 name.c_str());
    return 1;
  }
  std::printf("[%s] %s: %s\n", report.pass ? "PASS" : "FAIL", name.c_str(),
              report.detail.c_str());
  return report.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Visual servoing testbed: sampling-based and classical controllers on "
      "a simulated eye-in-hand gantry camera"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", test_name, oracle_name;
  std::optional<std::uint64_t> seed_flag;
  std::optional<int> tasks_flag;
  int parallel = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed_flag, "Seed override (beats MPPIVS_SEED)");
    sub->add_option("--parallel", parallel, "Worker/rollout thread count")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* run = app.add_subcommand("run", "Execute one servoing scenario");
  run->add_option("--config", config_path, "Scenario JSON file")->required();
  add_common(run);

  CLI::App* suite =
      app.add_subcommand("suite", "Run a multi-pose test suite");
  suite->add_option("--test", test_name, "Named preset (test1 .. test28)");
  suite->add_option("--config", config_path, "Suite JSON file");
  suite->add_option("--tasks", tasks_flag, "Number of sampled initial poses")
      ->check(CLI::PositiveNumber);
  add_common(suite);

  CLI::App* oracle =
      app.add_subcommand("oracle", "Run an independent check suite");
  oracle
      ->add_option("name", oracle_name,
                   "One of: finite-diff, pinv-axioms, mppi-toy, "
                   "depth-integration, rotation-roundtrip")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) {
      return cmd_run(config_path, out_dir, seed_flag, parallel);
    }
    if (suite->parsed()) {
      if (test_name.empty() == config_path.empty()) {
        throw ConfigError("suite needs exactly one of --test or --config");
      }
      return cmd_suite(test_name, config_path, out_dir, seed_flag, tasks_flag,
                       parallel);
    }
    if (oracle->parsed()) {
      return cmd_oracle(oracle_name);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
