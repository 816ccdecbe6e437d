#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "enlab/config.hpp"
#include "enlab/dynamics.hpp"
#include "enlab/signals.hpp"
#include "enlab/stability.hpp"
#include "enlab/verify.hpp"

namespace enlab {

// Block builders shared by the CLI and the tests.
std::shared_ptr<const EnvironmentSignal> build_signal(const Section& block,
                                                      const std::string& context,
                                                      const std::string& base_dir);
std::shared_ptr<const PotentialModel> build_potential(const Section& block,
                                                      const std::string& context);
DissipationSchedule build_dissipation(const Section& block, const std::string& context);
AgentConfig build_agent_config(const ScenarioConfig& scenario, const std::string& base_dir);
QuasiPeriodSpec build_quasi_period(const Section& block, const std::string& context);

struct CheckRow {
  std::string scenario;
  std::string check;
  std::string status;  // pass | fail | not-applicable
  std::string measured;
  std::string threshold;
  std::string statement;  // the invariant the check enforces
};

struct ScenarioOutcome {
  std::string name;
  std::vector<CheckRow> rows;
  std::string report_text;  // theorem/certificate blocks for reports.txt
};

struct RunOptions {
  std::string out_dir_override;  // --out
  std::string only;              // --only NAME
  int jobs = 1;
  bool plots = false;
};

struct SuiteResult {
  int exit_code;  // 0 all applicable pass, 1 config/runtime error, 2 any failure
  std::vector<CheckRow> rows;
  std::string output_dir;
};

// Executes every scenario (optionally in parallel), writes per-scenario
// trajectory CSVs, reports.txt, summary.csv, and optional SVG plots under the
// resolved output directory. Output resolution order: --out, config
// output_dir, $ENLAB_OUT_DIR, "./enlab_out".
SuiteResult run_suite(const ExperimentConfig& config, const RunOptions& options);

// Scenario names with their checks, one line each; runs nothing.
std::string list_scenarios(const ExperimentConfig& config);

std::string trajectory_csv(const TrajectoryRecord& traj);
std::string summary_csv(const std::vector<CheckRow>& rows);

}  // namespace enlab
