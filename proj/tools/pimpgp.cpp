#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pimpgp/config.hpp"
#include "pimpgp/harness.hpp"

namespace {

using namespace pimpgp;

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("file", "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("file", path + " is not valid JSON: " + e.what());
  }
}

int cmd_run(const std::string& config_path, bool seed_set, std::uint64_t seed,
            const std::string& out_dir) {
  RunConfig cfg = run_config_from_json(load_json_file(config_path));
  if (seed_set) cfg.seed = seed;
  const RunResult result = write_run_artifacts(cfg, out_dir);
  std::printf("run complete: %d generations, final best fitness %.6g, %.2fs\n",
              result.records.back().generation, result.best_fitness_final,
              result.wall_clock_seconds);
  std::printf("artifacts: %s/{%s, %s, %s}\n", out_dir.c_str(), kGenerationsFile, kSnapshotsFile,
              kMetaFile);
  return 0;
}

int cmd_batch(const std::string& spec_path, int jobs, const std::string& out_override) {
  ExperimentSpec spec = experiment_from_json(load_json_file(spec_path));
  if (!out_override.empty()) spec.output_dir = out_override;
  const BatchOutcome outcome = run_batch(spec, jobs, true);
  std::printf("batch: %d runs executed, %d already complete\n", outcome.runs_executed,
              outcome.runs_skipped);
  if (!outcome.ok()) {
    for (const std::string& failure : outcome.failures)
      std::fprintf(stderr, "failed: %s\n", failure.c_str());
    return 3;
  }
  return 0;
}

CompareMetric metric_from_name(const std::string& name) {
  if (name == "final_best_fitness") return CompareMetric::FinalBestFitness;
  if (name == "unique_solution_fraction") return CompareMetric::UniqueSolutionFraction;
  if (name == "mean_solution_depth") return CompareMetric::MeanSolutionDepth;
  throw ConfigError("metric", "unknown metric '" + name +
                                  "' (expected final_best_fitness, unique_solution_fraction, "
                                  "or mean_solution_depth)");
}

int cmd_compare(const std::string& dir_a, const std::string& dir_b,
                const std::vector<std::string>& metric_names, const std::string& out_path) {
  std::vector<CompareMetric> metrics;
  if (metric_names.empty()) {
    metrics = {CompareMetric::FinalBestFitness, CompareMetric::UniqueSolutionFraction,
               CompareMetric::MeanSolutionDepth};
  } else {
    for (const std::string& name : metric_names) metrics.push_back(metric_from_name(name));
  }
  const std::vector<ComparisonRow> rows = compare_cells(dir_a, dir_b, metrics);
  std::printf("%-26s %14s %14s %8s %12s %s\n", "metric", "a mean(sd)", "b mean(sd)", "winner",
              "p", "sig");
  for (const ComparisonRow& row : rows) {
    const std::string a = csv_float(row.mean_a) + "(" + csv_float(row.sd_a) + ")";
    const std::string b = csv_float(row.mean_b) + "(" + csv_float(row.sd_b) + ")";
    std::printf("%-26s %14s %14s %8s %12s %s\n", row.metric.c_str(), a.c_str(), b.c_str(),
                row.winner.c_str(), csv_float(row.p_value).c_str(),
                row.significant ? "*" : "");
  }
  if (!out_path.empty()) write_comparison_csv(out_path, rows);
  return 0;
}

int cmd_report(const std::string& cell_dir, const std::string& out_dir) {
  write_cell_report(cell_dir, out_dir);
  std::printf("report written: %s/{series.csv, depth_distribution.csv, improvements.csv}\n",
              out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tree-based genetic programming with mate-choice parent selection"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "run_out";
  std::uint64_t seed = 0;
  auto* run_cmd = app.add_subcommand("run", "execute one run and write its artifacts");
  run_cmd->add_option("--config", config_path, "run config JSON file")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed, "override the config's seed");
  run_cmd->add_option("--out", out_dir, "output directory (default run_out)");

  std::string spec_path, batch_out;
  int jobs = 1;
  auto* batch_cmd = app.add_subcommand("batch", "run an experiment matrix, resumably");
  batch_cmd->add_option("--spec", spec_path, "experiment spec JSON file")->required();
  batch_cmd->add_option("--jobs", jobs, "worker threads (default 1)");
  batch_cmd->add_option("--out", batch_out, "override the spec's output_dir");

  std::string dir_a, dir_b, compare_out;
  std::vector<std::string> metric_names;
  auto* compare_cmd = app.add_subcommand("compare", "compare two batch cells by shared seed");
  compare_cmd->add_option("--a", dir_a, "first cell directory")->required();
  compare_cmd->add_option("--b", dir_b, "second cell directory")->required();
  compare_cmd->add_option("--metric", metric_names,
                          "metric(s) to compare (default: all three)");
  compare_cmd->add_option("--out", compare_out, "also write a CSV report here");

  std::string cell_dir, report_out = "report_out";
  auto* report_cmd = app.add_subcommand("report", "write tidy per-generation CSVs for a cell");
  report_cmd->add_option("--cell", cell_dir, "batch cell directory")->required();
  report_cmd->add_option("--out", report_out, "output directory (default report_out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return cmd_run(config_path, seed_opt->count() > 0, seed, out_dir);
    if (*batch_cmd) return cmd_batch(spec_path, jobs, batch_out);
    if (*compare_cmd) return cmd_compare(dir_a, dir_b, metric_names, compare_out);
    if (*report_cmd) return cmd_report(cell_dir, report_out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
