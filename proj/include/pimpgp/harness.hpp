#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pimpgp/analysis.hpp"
#include "pimpgp/config.hpp"
#include "pimpgp/engine.hpp"

namespace pimpgp {

// On-disk run layout: <dir>/generations.jsonl (one record per line, streamed
// in generation order), <dir>/snapshots.json, and <dir>/meta.json (resolved
// config + finals).  meta.json is written last via a rename, so its presence
// marks the run complete; resumed batches skip such directories untouched.

inline constexpr int kArtifactSchemaVersion = 1;
inline constexpr const char* kMetaFile = "meta.json";
inline constexpr const char* kGenerationsFile = "generations.jsonl";
inline constexpr const char* kSnapshotsFile = "snapshots.json";

// CSV float convention: six significant digits.
inline std::string csv_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline nlohmann::ordered_json snapshot_to_json(const PopulationSnapshot& snap) {
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const SnapshotEntry& e : snap.entries)
    entries.push_back({{"solution", e.solution},
                       {"preference", e.preference},
                       {"solution_depth", e.solution_depth},
                       {"preference_depth", e.preference_depth},
                       {"fitness", e.fitness},
                       {"chosen_by_tournament", e.chosen_by_tournament},
                       {"chosen_by_mate_choice", e.chosen_by_mate_choice}});
  return {{"generation", snap.generation}, {"entries", entries}};
}

inline nlohmann::ordered_json finals_to_json(const RunFinals& f) {
  return {{"generations", f.generations},
          {"final_best_fitness", f.final_best_fitness},
          {"unique_solution_fraction", f.unique_solution_fraction},
          {"unique_preference_fraction", f.unique_preference_fraction},
          {"mean_solution_depth", f.mean_solution_depth},
          {"mean_preference_depth", f.mean_preference_depth},
          {"wall_clock_seconds", f.wall_clock_seconds}};
}

inline RunFinals finals_from_json(const nlohmann::json& j) {
  RunFinals f;
  f.generations = j.at("generations").get<int>();
  f.final_best_fitness = j.at("final_best_fitness").get<double>();
  f.unique_solution_fraction = j.at("unique_solution_fraction").get<double>();
  f.unique_preference_fraction = j.at("unique_preference_fraction").get<double>();
  f.mean_solution_depth = j.at("mean_solution_depth").get<double>();
  f.mean_preference_depth = j.at("mean_preference_depth").get<double>();
  f.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
  return f;
}

inline bool run_complete(const std::filesystem::path& dir) {
  return std::filesystem::exists(dir / kMetaFile);
}

// Executes one run and writes its three artifacts.  Generation records are
// streamed to the JSONL file as they are produced.
inline RunResult write_run_artifacts(const RunConfig& cfg, const std::filesystem::path& dir) {
  validate_config(cfg);
  std::filesystem::create_directories(dir);

  std::ofstream jsonl(dir / kGenerationsFile, std::ios::trunc);
  if (!jsonl) throw std::runtime_error("cannot write " + (dir / kGenerationsFile).string());
  RunResult result = run(cfg, [&](const GenerationRecord& rec) {
    jsonl << to_json(rec).dump() << '\n';
  });
  jsonl.close();
  if (!jsonl) throw std::runtime_error("write failed for " + (dir / kGenerationsFile).string());

  {
    nlohmann::ordered_json snaps = nlohmann::ordered_json::array();
    for (const PopulationSnapshot& s : result.snapshots) snaps.push_back(snapshot_to_json(s));
    std::ofstream out(dir / kSnapshotsFile, std::ios::trunc);
    out << nlohmann::ordered_json({{"snapshots", snaps}}).dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + (dir / kSnapshotsFile).string());
  }

  nlohmann::ordered_json meta;
  meta["schema_version"] = kArtifactSchemaVersion;
  meta["config"] = run_config_to_json(cfg);
  meta["finals"] = finals_to_json(result.finals());
  meta["statistics_note"] = "Wilcoxon applied unconditionally (no normality pre-test)";
  if (cfg.problem == ProblemId::Diabetes)
    meta["target_scaling"] = "targets min-max normalized to [0,1]";
  const auto tmp = dir / (std::string(kMetaFile) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << meta.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, dir / kMetaFile);
  return result;
}

inline std::string seed_dir_name(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

// Cell summary: one row per metric, means and sample deviations over seeds.
inline void write_summary_csv(const std::filesystem::path& path, const BatchSummary& summary) {
  std::ofstream out(path, std::ios::trunc);
  out << "metric,runs,mean,sd\n";
  for (const MetricSummary& row : summary.rows)
    out << row.metric << ',' << summary.runs << ',' << csv_float(row.mean) << ','
        << csv_float(row.sd) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline RunFinals read_run_finals(const std::filesystem::path& run_dir) {
  std::ifstream in(run_dir / kMetaFile);
  if (!in) throw std::runtime_error("missing " + (run_dir / kMetaFile).string());
  nlohmann::json meta = nlohmann::json::parse(in);
  return finals_from_json(meta.at("finals"));
}

struct BatchOutcome {
  int runs_executed = 0;
  int runs_skipped = 0;  // already complete
  std::vector<std::string> failures;  // "cell/seed_N: message"
  bool ok() const { return failures.empty(); }
};

// Runs the full matrix, resumably: completed run directories are skipped,
// and each cell's summary.csv is (re)written once all its seeds are present.
// Worker threads pull independent (cell, seed) tasks; every run is
// self-deterministic, so the pool size never changes results.
inline BatchOutcome run_batch(const ExperimentSpec& spec, int jobs = 1,
                              bool log_progress = false) {
  const std::vector<ExperimentCell> cells = expand_experiment(spec);
  const std::filesystem::path root(spec.output_dir);
  std::filesystem::create_directories(root);

  struct Task {
    const ExperimentCell* cell;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  BatchOutcome outcome;
  for (const ExperimentCell& cell : cells)
    for (const std::uint64_t seed : spec.seeds) {
      if (run_complete(root / cell.name / seed_dir_name(seed)))
        ++outcome.runs_skipped;
      else
        tasks.push_back({&cell, seed});
    }

  std::mutex mutex;
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      RunConfig cfg = task.cell->config;
      cfg.seed = task.seed;
      const auto dir = root / task.cell->name / seed_dir_name(task.seed);
      try {
        write_run_artifacts(cfg, dir);
        std::lock_guard<std::mutex> lock(mutex);
        ++outcome.runs_executed;
        if (log_progress)
          std::fprintf(stderr, "done %s/%s\n", task.cell->name.c_str(),
                       seed_dir_name(task.seed).c_str());
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(mutex);
        outcome.failures.push_back(task.cell->name + "/" + seed_dir_name(task.seed) + ": " +
                                   e.what());
      }
    }
  };

  if (jobs <= 1 || tasks.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int n = std::min<int>(jobs, static_cast<int>(tasks.size()));
    pool.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  for (const ExperimentCell& cell : cells) {
    std::vector<RunFinals> finals;
    bool complete = true;
    for (const std::uint64_t seed : spec.seeds) {
      const auto dir = root / cell.name / seed_dir_name(seed);
      if (!run_complete(dir)) {
        complete = false;
        break;
      }
      finals.push_back(read_run_finals(dir));
    }
    if (complete) write_summary_csv(root / cell.name / "summary.csv", aggregate_batch(finals));
  }
  return outcome;
}

// Finals per seed for one cell directory, discovered from seed_* subdirs.
inline std::map<std::uint64_t, RunFinals> load_cell_finals(const std::filesystem::path& cell_dir) {
  if (!std::filesystem::is_directory(cell_dir))
    throw std::runtime_error("not a batch cell directory: " + cell_dir.string());
  std::map<std::uint64_t, RunFinals> finals;
  for (const auto& entry : std::filesystem::directory_iterator(cell_dir)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("seed_", 0) != 0) continue;
    if (!run_complete(entry.path())) continue;
    finals[std::stoull(name.substr(5))] = read_run_finals(entry.path());
  }
  if (finals.empty())
    throw std::runtime_error("no completed runs under " + cell_dir.string());
  return finals;
}

// Pairs two cells by seed.  Seed-set mismatches are an error naming the
// missing seeds on each side.
inline PairedSample pair_cells(const std::filesystem::path& dir_a,
                               const std::filesystem::path& dir_b, CompareMetric metric) {
  const auto finals_a = load_cell_finals(dir_a);
  const auto finals_b = load_cell_finals(dir_b);

  std::string missing_a, missing_b;
  for (const auto& [seed, f] : finals_a)
    if (finals_b.count(seed) == 0) missing_b += " " + std::to_string(seed);
  for (const auto& [seed, f] : finals_b)
    if (finals_a.count(seed) == 0) missing_a += " " + std::to_string(seed);
  if (!missing_a.empty() || !missing_b.empty()) {
    std::string msg = "seed sets differ:";
    if (!missing_b.empty()) msg += " missing from " + dir_b.string() + ":" + missing_b + ";";
    if (!missing_a.empty()) msg += " missing from " + dir_a.string() + ":" + missing_a + ";";
    throw std::runtime_error(msg);
  }

  const auto pick = [metric](const RunFinals& f) {
    switch (metric) {
      case CompareMetric::FinalBestFitness: return f.final_best_fitness;
      case CompareMetric::UniqueSolutionFraction: return f.unique_solution_fraction;
      case CompareMetric::MeanSolutionDepth: return f.mean_solution_depth;
    }
    return 0.0;
  };
  PairedSample sample;
  sample.label_a = dir_a.filename().string();
  sample.label_b = dir_b.filename().string();
  for (const auto& [seed, fa] : finals_a) sample.values.emplace_back(pick(fa), pick(finals_b.at(seed)));
  return sample;
}

inline std::vector<ComparisonRow> compare_cells(const std::filesystem::path& dir_a,
                                                const std::filesystem::path& dir_b,
                                                const std::vector<CompareMetric>& metrics) {
  std::vector<ComparisonRow> rows;
  rows.reserve(metrics.size());
  for (const CompareMetric metric : metrics)
    rows.push_back(compare(pair_cells(dir_a, dir_b, metric), metric));
  return rows;
}

inline void write_comparison_csv(const std::filesystem::path& path,
                                 const std::vector<ComparisonRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  out << "metric,mean_a,sd_a,mean_b,sd_b,winner,p_value,significant\n";
  for (const ComparisonRow& row : rows)
    out << row.metric << ',' << csv_float(row.mean_a) << ',' << csv_float(row.sd_a) << ','
        << csv_float(row.mean_b) << ',' << csv_float(row.sd_b) << ',' << row.winner << ','
        << csv_float(row.p_value) << ',' << (row.significant ? "true" : "false") << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// All generation records of one run, in order.
inline std::vector<GenerationRecord> read_run_records(const std::filesystem::path& run_dir) {
  std::ifstream in(run_dir / kGenerationsFile);
  if (!in) throw std::runtime_error("missing " + (run_dir / kGenerationsFile).string());
  std::vector<GenerationRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(generation_record_from_json(nlohmann::json::parse(line)));
  }
  return records;
}

// Tidy long-format per-generation series across a cell's runs:
// generation,metric,mean,sd.  The sd is the sample deviation across runs.
inline void write_series_csv(const std::filesystem::path& path,
                             const std::vector<std::vector<GenerationRecord>>& runs) {
  if (runs.empty()) throw std::invalid_argument("no runs to report");
  const std::size_t generations = runs.front().size();
  for (const auto& r : runs)
    if (r.size() != generations)
      throw std::invalid_argument("runs disagree on generation count");

  struct Series {
    const char* name;
    double (*pick)(const GenerationRecord&);
  };
  static const Series series[] = {
      {"best_fitness", [](const GenerationRecord& r) { return r.best_fitness; }},
      {"mean_fitness", [](const GenerationRecord& r) { return r.mean_fitness; }},
      {"unique_solution_fraction",
       [](const GenerationRecord& r) { return r.unique_solution_fraction; }},
      {"unique_preference_fraction",
       [](const GenerationRecord& r) { return r.unique_preference_fraction; }},
      {"mean_solution_depth", [](const GenerationRecord& r) { return r.mean_solution_depth; }},
      {"mean_preference_depth",
       [](const GenerationRecord& r) { return r.mean_preference_depth; }},
      {"chooser_fraction", [](const GenerationRecord& r) { return r.role_fractions.chooser; }},
      {"courter_fraction", [](const GenerationRecord& r) { return r.role_fractions.courter; }},
      {"both_fraction", [](const GenerationRecord& r) { return r.role_fractions.both; }},
      {"unselected_fraction",
       [](const GenerationRecord& r) { return r.role_fractions.unselected; }},
  };

  std::ofstream out(path, std::ios::trunc);
  out << "generation,metric,mean,sd\n";
  std::vector<double> values(runs.size());
  for (std::size_t g = 0; g < generations; ++g)
    for (const Series& s : series) {
      for (std::size_t r = 0; r < runs.size(); ++r) values[r] = s.pick(runs[r][g]);
      out << runs.front()[g].generation << ',' << s.name << ',' << csv_float(mean_of(values))
          << ',' << csv_float(sample_sd(values)) << '\n';
    }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// Depth-bucket counts by generation, role, and chromosome, summed over runs:
// generation,role,chromosome,depth,count.  Zero rows are omitted.
inline void write_depth_distribution_csv(const std::filesystem::path& path,
                                         const std::vector<std::vector<GenerationRecord>>& runs) {
  if (runs.empty()) throw std::invalid_argument("no runs to report");
  std::ofstream out(path, std::ios::trunc);
  out << "generation,role,chromosome,depth,count\n";
  const std::size_t generations = runs.front().size();
  for (std::size_t g = 0; g < generations; ++g)
    for (const Role role : kAllRoles)
      for (const Chromosome ch : {Chromosome::Solution, Chromosome::Preference})
        for (int d = 0; d < kDepthBuckets; ++d) {
          long count = 0;
          for (const auto& r : runs)
            count += r[g].depth_histograms[histogram_slot(role, ch)][static_cast<std::size_t>(d)];
          if (count == 0) continue;
          out << runs.front()[g].generation << ',' << role_name(role) << ','
              << (ch == Chromosome::Solution ? "solution" : "preference") << ',' << d << ','
              << count << '\n';
        }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// Improvement events summed over runs: generation,preference_depth,
// is_best_ever,count.
inline void write_improvements_csv(const std::filesystem::path& path,
                                   const std::vector<std::vector<GenerationRecord>>& runs) {
  if (runs.empty()) throw std::invalid_argument("no runs to report");
  std::ofstream out(path, std::ios::trunc);
  out << "generation,preference_depth,is_best_ever,count\n";
  const std::size_t generations = runs.front().size();
  for (std::size_t g = 0; g < generations; ++g) {
    std::map<std::pair<int, bool>, long> counts;
    for (const auto& r : runs)
      for (const ImprovementEvent& e : r[g].improvement_events)
        ++counts[{e.preference_depth, e.is_best_ever}];
    for (const auto& [key, count] : counts)
      out << runs.front()[g].generation << ',' << key.first << ','
          << (key.second ? "true" : "false") << ',' << count << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// Regenerates the tidy figure CSVs for one cell directory.
inline void write_cell_report(const std::filesystem::path& cell_dir,
                              const std::filesystem::path& out_dir) {
  const auto finals = load_cell_finals(cell_dir);  // validates completeness
  std::vector<std::vector<GenerationRecord>> runs;
  runs.reserve(finals.size());
  for (const auto& [seed, f] : finals)
    runs.push_back(read_run_records(cell_dir / seed_dir_name(seed)));
  std::filesystem::create_directories(out_dir);
  write_series_csv(out_dir / "series.csv", runs);
  write_depth_distribution_csv(out_dir / "depth_distribution.csv", runs);
  write_improvements_csv(out_dir / "improvements.csv", runs);
}

}  // namespace pimpgp
